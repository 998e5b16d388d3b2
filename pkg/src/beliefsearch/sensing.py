"""Field-of-view geometry, stochastic detections, and belief updates.

Two updates live here on purpose: :func:`exact_posterior` is the full joint
Bayes update the simulator applies after every real observation, while
:func:`planning_update` is the cheap negative-reading approximation planners
apply inside simulated lookahead.  They are never interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .gridworld import AgentState, BeliefMap, Cell, GridSpec

BUILTIN_MASKS = ("point", "donut", "forward")


class DegenerateEvidenceError(ValueError):
    """All hypotheses have zero posterior mass (only possible when a
    detection rate is exactly 1 and the readings contradict it)."""


@dataclass(frozen=True)
class FovMask:
    """Observable cell offsets in the canonical north-facing frame.

    ``p_tp`` is the per-cell probability of a positive reading when the
    target occupies the cell; ``p_tn`` the probability of a negative reading
    when it does not.  One rate applies to every cell of the mask.
    """

    offsets: tuple[tuple[int, int], ...]
    p_tp: float = 0.9
    p_tn: float = 0.9
    name: str | None = None

    def __post_init__(self):
        offsets = tuple(sorted(set((int(a), int(b)) for a, b in self.offsets)))
        if not offsets:
            raise ValueError("a field of view needs at least one offset")
        if not (0.0 < self.p_tp <= 1.0) or not (0.0 < self.p_tn <= 1.0):
            raise ValueError(f"detection rates must lie in (0, 1], got {self.p_tp}, {self.p_tn}")
        object.__setattr__(self, "offsets", offsets)


@dataclass(frozen=True)
class Observation:
    """One sensor sweep: (cell, positive?) per in-bounds FOV cell."""

    readings: tuple[tuple[Cell, bool], ...]

    def positive_at(self, cell: Cell) -> bool:
        return any(c == cell and pos for c, pos in self.readings)


# --- mask fixtures --------------------------------------------------------

def parse_mask(text: str, p_tp: float = 0.9, p_tn: float = 0.9, name: str | None = None) -> FovMask:
    """Parse the plain-text mask format.

    Lines starting with ``#`` are comments.  ``X`` marks an observable cell,
    ``.`` an unobservable one, and ``@`` the (unobservable) agent cell; north
    is up.  Without an ``@`` the anchor is the centre of the glyph grid, so
    an observable agent cell is written as an ``X`` there.
    """
    rows = [ln for ln in (ln.rstrip() for ln in text.splitlines())
            if ln and not ln.lstrip().startswith("#")]
    if not rows:
        raise ValueError("mask file has no glyph rows")
    width = max(len(r) for r in rows)
    anchor = None
    cells = []
    for r, line in enumerate(rows):
        for c, ch in enumerate(line):
            if ch == "@":
                if anchor is not None:
                    raise ValueError("mask file has more than one '@' anchor")
                anchor = (r, c)
            elif ch == "X":
                cells.append((r, c))
            elif ch != ".":
                raise ValueError(f"unexpected mask glyph {ch!r} at row {r + 1}")
    if anchor is None:
        if len(rows) % 2 == 0 or width % 2 == 0:
            raise ValueError("mask without '@' must have odd dimensions")
        anchor = (len(rows) // 2, width // 2)
    offsets = tuple((r - anchor[0], c - anchor[1]) for r, c in cells)
    return FovMask(offsets, p_tp, p_tn, name=name)


def load_mask(name_or_path: str, p_tp: float = 0.9, p_tn: float = 0.9) -> FovMask:
    """Load a built-in mask by name or any mask fixture file by path."""
    if name_or_path in BUILTIN_MASKS:
        text = resources.files("beliefsearch.masks").joinpath(f"{name_or_path}.txt").read_text()
        return parse_mask(text, p_tp, p_tn, name=name_or_path)
    path = Path(name_or_path)
    if not path.is_file():
        raise FileNotFoundError(f"mask fixture not found: {name_or_path}")
    return parse_mask(path.read_text(), p_tp, p_tn, name=path.stem)


# --- orientation ----------------------------------------------------------

def rotate_offset(offset: tuple[int, int], heading) -> tuple[int, int]:
    """Rotate a north-frame offset into the agent's heading frame."""
    di, dj = offset
    for _ in range(int(heading) % 4):
        di, dj = dj, -di
    return di, dj


def resolve_fov(mask: FovMask, state: AgentState, spec: GridSpec) -> tuple[Cell, ...]:
    """Oriented, translated, border-clipped FOV cells, sorted by (i, j).

    May be empty when every offset falls outside the grid (possible at the
    border for masks that exclude the agent cell).
    """
    pi, pj = state.position
    cells = []
    for off in mask.offsets:
        di, dj = rotate_offset(off, state.heading)
        i, j = pi + di, pj + dj
        if 1 <= i <= spec.rows and 1 <= j <= spec.cols:
            cells.append(Cell(i, j))
    cells.sort()
    return tuple(cells)


class FovResolver:
    """Memoized FOV lookups for one mask on one grid.

    Caches, per (position, heading), both the Cell tuple and the raveled
    0-based index array planners use for vectorized belief updates.
    """

    def __init__(self, mask: FovMask, spec: GridSpec):
        self.mask = mask
        self.spec = spec
        self._rotated = [
            sorted(rotate_offset(off, h) for off in mask.offsets) for h in range(4)
        ]
        self.cache: dict[int, tuple[tuple[Cell, ...], np.ndarray, int]] = {}

    def lookup(self, flat_pos: int, heading: int):
        """Return (cells, flat_idx, scalar_idx); scalar_idx is -1 unless the
        resolved FOV is a single cell."""
        key = flat_pos * 4 + heading
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        rows, cols = self.spec
        pi, pj = flat_pos // cols + 1, flat_pos % cols + 1
        cells = []
        flat = []
        for di, dj in self._rotated[heading]:
            i, j = pi + di, pj + dj
            if 1 <= i <= rows and 1 <= j <= cols:
                cells.append(Cell(i, j))
                flat.append((i - 1) * cols + (j - 1))
        entry = (
            tuple(cells),
            np.asarray(flat, dtype=np.intp),
            flat[0] if len(flat) == 1 else -1,
        )
        self.cache[key] = entry
        return entry

    def cells(self, state: AgentState) -> tuple[Cell, ...]:
        flat_pos = self.spec.flat_index(state.position)
        return self.lookup(flat_pos, int(state.heading))[0]


# --- observation sampling ---------------------------------------------------

def sample_observation(fov_cells, target: Cell, mask: FovMask, rng) -> Observation:
    """Draw one reading per FOV cell.

    The target's cell reads positive with probability ``p_tp``; every other
    cell reads positive with probability ``1 - p_tn``.  Cells are sampled
    independently in the given order; pass an int seed or a Generator.
    """
    gen = np.random.default_rng(rng)
    readings = []
    for cell in fov_cells:
        if cell == target:
            positive = gen.random() < mask.p_tp
        else:
            positive = gen.random() < (1.0 - mask.p_tn)
        readings.append((cell, bool(positive)))
    return Observation(tuple(readings))


# --- belief updates ---------------------------------------------------------

def exact_posterior(prior: BeliefMap, obs: Observation, mask: FovMask) -> BeliefMap:
    """Joint Bayes update over all readings, renormalized.

    For hypothesis cell c the likelihood of a reading at cell z is p_tp
    (positive) or 1-p_tp (negative) when c == z, and 1-p_tn (positive) or
    p_tn (negative) otherwise; readings are conditionally independent.
    """
    if not prior.is_normalized():
        raise ValueError("exact_posterior requires a normalized prior")
    # The off-cell factor of each reading scales every hypothesis and cancels
    # in the normalization, so only observed cells need correcting; the dense
    # product is kept for the base = 0 edge (p_tn = 1 with a positive read).
    if mask.p_tn < 1.0 or not any(pos for _, pos in obs.readings):
        post = prior.mass.copy()
        for cell, positive in obs.readings:
            base = 1.0 - mask.p_tn if positive else mask.p_tn
            at_cell = mask.p_tp if positive else 1.0 - mask.p_tp
            post[cell.i - 1, cell.j - 1] *= at_cell / base
    else:
        like = np.ones_like(prior.mass)
        for cell, positive in obs.readings:
            base = 1.0 - mask.p_tn if positive else mask.p_tn
            at_cell = mask.p_tp if positive else 1.0 - mask.p_tp
            prev = like[cell.i - 1, cell.j - 1]
            like *= base
            like[cell.i - 1, cell.j - 1] = prev * at_cell
        post = prior.mass * like
    total = post.sum()
    if total <= 0.0:
        raise DegenerateEvidenceError(
            "observation has zero likelihood under every hypothesis"
        )
    return BeliefMap(prior.grid, post / total)


def planning_update(belief: BeliefMap, fov_cells, mask: FovMask) -> BeliefMap:
    """Assume-negative update used inside simulated lookahead.

    Multiplies each observed cell by (1 - p_tp) and touches nothing else; no
    normalization, so total mass is non-increasing.
    """
    arr = belief.mass.copy()
    factor = 1.0 - mask.p_tp
    for cell in fov_cells:
        arr[cell.i - 1, cell.j - 1] *= factor
    return BeliefMap(belief.grid, arr)
