"""Macro-actions: the four primitive moves plus one goto per region.

A goto option drives the agent to its region's most probable cell along an
axis-priority greedy path (optimal here, since the grid has no obstacles)
and records the FOV swept at each step for reward accounting.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from .gridworld import Action, AgentState, BeliefMap, Cell, GridSpec, step
from .roi import RoiSet, roi_target_cell
from .sensing import FovMask, FovResolver, resolve_fov


class OptionKind(IntEnum):
    PRIMITIVE = 0
    GOTO_ROI = 1


@dataclass(frozen=True)
class Option:
    """A primitive move or a region-directed macro-action.

    Primitives carry their single action as the trajectory from birth.
    Goto options start unexpanded (``swept_cells is None``); expansion pins
    the trajectory and the FOV swept after each step.  An expanded goto from
    a start equal to its target legitimately has an empty trajectory.
    """

    kind: OptionKind
    action: Action | None = None
    roi_id: int | None = None
    trajectory: tuple[Action, ...] = ()
    swept_cells: tuple[tuple[Cell, ...], ...] | None = None

    def __post_init__(self):
        if self.kind == OptionKind.PRIMITIVE:
            if self.action is None or self.roi_id is not None:
                raise ValueError("primitive options carry exactly an action")
            object.__setattr__(self, "trajectory", (self.action,))
        elif self.roi_id is None or self.action is not None:
            raise ValueError("goto options carry exactly a region id")
        if self.swept_cells is not None and len(self.swept_cells) != len(self.trajectory):
            raise ValueError("one swept FOV per trajectory step")

    @property
    def is_expanded(self) -> bool:
        return self.swept_cells is not None

    def describe(self) -> dict:
        if self.kind == OptionKind.PRIMITIVE:
            return {"kind": "primitive", "action": self.action.name.lower()}
        return {"kind": "goto_roi", "roi": self.roi_id, "length": len(self.trajectory)}


PRIMITIVE_OPTIONS = tuple(Option(OptionKind.PRIMITIVE, action=a) for a in Action)


def available_options(state: AgentState, roi: RoiSet | None, belief: BeliefMap) -> list[Option]:
    """The four primitives plus an unexpanded goto per region whose target
    cell (under the live belief) differs from the agent's position."""
    opts = list(PRIMITIVE_OPTIONS)
    if roi is not None:
        for k in range(1, roi.num_regions + 1):
            if roi_target_cell(roi, k, belief) != state.position:
                opts.append(Option(OptionKind.GOTO_ROI, roi_id=k))
    return opts


def greedy_path(start: Cell, target: Cell) -> list[Action]:
    """Axis-priority greedy walk: move along the axis with the larger
    remaining displacement, rows winning ties.  Manhattan-optimal."""
    actions = []
    i, j = start
    while (i, j) != (target.i, target.j):
        dr = target.i - i
        dc = target.j - j
        if dr != 0 and (abs(dr) >= abs(dc) or dc == 0):
            actions.append(Action.DOWN if dr > 0 else Action.UP)
            i += 1 if dr > 0 else -1
        else:
            actions.append(Action.RIGHT if dc > 0 else Action.LEFT)
            j += 1 if dc > 0 else -1
    return actions


def _expand_to_target(
    state: AgentState,
    target: Cell,
    mask: FovMask,
    spec: GridSpec,
    resolver: FovResolver | None = None,
) -> tuple[tuple[Action, ...], tuple[tuple[Cell, ...], ...]]:
    trajectory = tuple(greedy_path(state.position, target))
    swept = []
    cur = state
    for action in trajectory:
        cur = step(cur, action, spec)
        if resolver is not None:
            swept.append(resolver.cells(cur))
        else:
            swept.append(resolve_fov(mask, cur, spec))
    return trajectory, tuple(swept)


def expand_option(
    opt: Option,
    state: AgentState,
    roi: RoiSet | None,
    belief: BeliefMap,
    mask: FovMask,
    spec: GridSpec,
    resolver: FovResolver | None = None,
) -> Option:
    """Pin an option's trajectory and swept FOVs for execution from ``state``.

    For gotos the target is the region's most probable cell under ``belief``
    at expansion time; belief drift afterwards does not replan the path.
    """
    if opt.kind == OptionKind.PRIMITIVE:
        trajectory = (opt.action,)
        nxt = step(state, opt.action, spec)
        swept = (resolver.cells(nxt) if resolver is not None else resolve_fov(mask, nxt, spec),)
        return Option(OptionKind.PRIMITIVE, action=opt.action, swept_cells=swept)
    if roi is None:
        raise ValueError("cannot expand a goto option without regions")
    target = roi_target_cell(roi, opt.roi_id, belief)
    trajectory, swept = _expand_to_target(state, target, mask, spec, resolver)
    return Option(
        OptionKind.GOTO_ROI,
        roi_id=opt.roi_id,
        trajectory=trajectory,
        swept_cells=swept,
    )
