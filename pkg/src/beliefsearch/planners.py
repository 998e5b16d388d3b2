"""Option-level planners: PUCT tree search over the full belief dynamics or
the static-map approximation, plus two receding-horizon baselines.

All planners return the next option to execute and never mutate the caller's
belief.  Tree search simulates the assume-negative belief update per step
(full variant) or freezes the map entirely (lite variant); both price a goto
differently: the full variant sums the mass actually swept along the
trajectory, the lite variant uses the region's mean mass scaled by map area
and centroid distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gridworld import Action, AgentState, BeliefMap, Cell, GridSpec, step
from .options import Option, OptionKind, available_options, expand_option, greedy_path
from .roi import RoiSet
from .sensing import FovMask, FovResolver


@dataclass(frozen=True)
class PuctConfig:
    """Tree-search budget and selection parameters.

    ``time_penalty`` of None resolves to 1/(rows*cols) at planning time, so
    the per-step cost scales with typical cell mass.  The sub-unity discount
    matters: undiscounted lookahead collects the same nearby mass whatever
    the move order, leaving arm values tied within the time penalty and the
    search effectively blind.
    """

    iterations: int = 40
    rollout_depth: int = 60
    exploration_c: float = 0.5
    time_penalty: float | None = None
    discount: float = 0.97
    rng_seed: int = 0

    def __post_init__(self):
        if self.iterations < 0 or self.rollout_depth < 0:
            raise ValueError("iteration and rollout budgets must be non-negative")
        if self.exploration_c < 0:
            raise ValueError("exploration constant must be non-negative")
        if not (0.0 < self.discount <= 1.0):
            raise ValueError("discount must lie in (0, 1]")
        if self.time_penalty is not None and self.time_penalty < 0:
            raise ValueError("time penalty must be non-negative")


@dataclass(frozen=True)
class LiteConfig(PuctConfig):
    """Static-map variant parameters; adds the goto density tuning factor."""

    density_factor: float = 8e-6

    def __post_init__(self):
        super().__post_init__()
        if self.density_factor <= 0:
            raise ValueError("density factor must be positive")


@dataclass(frozen=True)
class HorizonConfig:
    """Receding-horizon baseline parameters (greedy and DPS)."""

    horizon: int = 20
    epsilon: float = 0.65
    rollouts_per_action: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError("epsilon must lie in [0, 1]")
        if self.rollouts_per_action < 1:
            raise ValueError("need at least one rollout per action")


# (di, dj, heading) per action, indexed by Action value.
_MOVES = ((-1, 0, 0), (1, 0, 2), (0, -1, 3), (0, 1, 1))


def resolve_time_penalty(cfg, spec: GridSpec) -> float:
    return cfg.time_penalty if cfg.time_penalty is not None else 1.0 / spec.size


# --- reward functions -------------------------------------------------------

def reward_full(belief_before: BeliefMap, option: Option, mask: FovMask,
                time_penalty: float) -> float:
    """Swept-mass reward under the full dynamics.

    Each trajectory step earns the FOV mass read before that step's
    assume-negative update, minus the time penalty; the update then applies
    before the next step is scored.  Requires an expanded option.
    """
    if not option.is_expanded:
        raise ValueError("reward_full requires an expanded option")
    arr = belief_before.mass.copy()
    factor = 1.0 - mask.p_tp
    total = 0.0
    for cells in option.swept_cells:
        for c in cells:
            total += arr[c.i - 1, c.j - 1]
            arr[c.i - 1, c.j - 1] *= factor
        total -= time_penalty
    return total


def reward_lite(state: AgentState, option: Option, roi: RoiSet | None,
                belief: BeliefMap, cfg: LiteConfig) -> float:
    """Static-map reward: FOV mass for primitives, anticipated region
    density for gotos.

    A goto to region k is worth f * mean_mass_k / (A^2 * dist_k) with A the
    cell count and dist_k the Euclidean distance from the agent to the
    region centroid, floored at one cell.  Mean mass is refreshed from the
    live belief.
    """
    d = resolve_time_penalty(cfg, belief.grid)
    if option.kind == OptionKind.PRIMITIVE:
        if not option.is_expanded:
            raise ValueError("reward_lite requires an expanded primitive option")
        return sum(belief.mass_at(c) for c in option.swept_cells[0]) - d
    if roi is None:
        raise ValueError("goto reward requires regions")
    k = option.roi_id
    region = roi.region_flat_indices[k - 1]
    mbar = float(belief.mass.ravel()[region].mean())
    ci, cj = roi.centroids[k - 1]
    dist = max(math.hypot(state.position.i - ci, state.position.j - cj), 1.0)
    area = float(belief.grid.size)
    return cfg.density_factor * mbar / (area * area * dist)


# --- PUCT tree search -------------------------------------------------------

class _Edge:
    __slots__ = ("kind", "ident", "target_flat", "actions", "step_fovs", "step_cells",
                 "end_i", "end_j", "end_h", "length", "reward", "child")

    def __init__(self, kind: int, ident: int, target_flat: int = -1):
        self.kind = kind            # 0 primitive, 1 goto
        self.ident = ident          # Action value or region id
        self.target_flat = target_flat
        self.actions = None        # tuple[Action, ...] once expanded
        self.step_fovs = None      # list of (flat_idx_array, scalar_idx)
        self.step_cells = None     # tuple of Cell tuples, for materialization
        self.end_i = self.end_j = self.end_h = 0
        self.length = 0
        self.reward = None         # cached: node belief is path-determined
        self.child = None


class _Node:
    __slots__ = ("i", "j", "h", "edges", "N", "child_N", "child_Q")

    def __init__(self, i: int, j: int, h: int, edges: list):
        self.i = i
        self.j = j
        self.h = h
        self.edges = edges
        self.N = 1
        self.child_N = [0] * len(edges)
        self.child_Q = [0.0] * len(edges)


class PuctPlanner:
    """PUCT over options; ``variant`` follows the config type.

    A :class:`LiteConfig` selects the static-map variant; any other
    :class:`PuctConfig` selects full belief dynamics.  Without an
    :class:`RoiSet` only the four primitives are searched.
    """

    def __init__(self, spec: GridSpec, mask: FovMask, cfg: PuctConfig,
                 roi: RoiSet | None = None, rng=None):
        self.spec = spec
        self.mask = mask
        self.cfg = cfg
        self.roi = roi
        self.lite = isinstance(cfg, LiteConfig)
        self.resolver = FovResolver(mask, spec)
        self.rng = np.random.default_rng(cfg.rng_seed if rng is None else rng)
        self.factor = 1.0 - mask.p_tp
        if roi is not None:
            self._regions = roi.region_flat_indices
            self._centroids = roi.centroids
        else:
            self._regions = ()
            self._centroids = ()
        self.last_root_stats: list[dict] = []

    # -- public ---------------------------------------------------------

    def plan(self, belief: BeliefMap, state: AgentState) -> Option:
        cfg = self.cfg
        spec = self.spec
        self._d = resolve_time_penalty(cfg, spec)
        self._area2 = float(spec.size) ** 2
        base = belief.mass.ravel()
        if self.lite:
            self._arr = base  # read-only: the lite variant never writes
            self._mbars = [float(base[r].mean()) for r in self._regions]
        else:
            self._base = base
            self._arr = base.copy()
        self._base_targets = {
            k: int(r[int(np.argmax(base[r]))])
            for k, r in enumerate(self._regions, start=1)
        }

        if cfg.iterations == 0:
            opts = available_options(state, self.roi, belief)
            choice = opts[int(self.rng.integers(len(opts)))]
            self.last_root_stats = []
            self.last_root_n = 1
            return choice

        pi, pj = state.position
        self._reset_targets()
        # One uniform draw per rollout pick; each pick consumes at least one
        # depth unit, so this block covers the whole planning call.
        self._u = self.rng.random(cfg.iterations * max(cfg.rollout_depth, 1) + 1)
        self._ui = 0
        root = self._make_node(pi, pj, int(state.heading))
        full = not self.lite
        for _ in range(cfg.iterations):
            if full:
                # Cheaper than an undo log: one memcpy restores the whole
                # simulation belief.
                np.copyto(self._arr, self._base)
            self._reset_targets()
            self._simulate(root)

        best = max(
            range(len(root.edges)),
            key=lambda e: (root.child_N[e], root.child_Q[e], -e),
        )
        self.last_root_stats = [
            {"option": self._edge_describe(root.edges[e]),
             "n": root.child_N[e], "q": root.child_Q[e]}
            for e in range(len(root.edges))
        ]
        self.last_root_n = root.N
        return self._materialize(root.edges[best])

    # -- tree machinery ---------------------------------------------------

    def _reset_targets(self) -> None:
        """Per-simulation cache of each region's argmax cell.

        Simulated updates only shrink mass, so a cached argmax stays valid
        until that exact cell is updated; ``_tmap`` (flat -> region) makes
        the invalidation check O(1) per updated cell.
        """
        self._targets = dict(self._base_targets)
        self._tmap = {flat: k for k, flat in self._targets.items()}
        self._dirty: set[int] = set()

    def _target(self, k: int) -> int:
        if k in self._dirty:
            region = self._regions[k - 1]
            flat = int(region[int(np.argmax(self._arr[region]))])
            self._tmap.pop(self._targets[k], None)
            self._targets[k] = flat
            self._tmap[flat] = k
            self._dirty.discard(k)
        return self._targets[k]

    def _make_node(self, i: int, j: int, h: int) -> _Node:
        cols = self.spec.cols
        pos_flat = (i - 1) * cols + (j - 1)
        edges = [_Edge(0, a) for a in range(4)]
        for k in range(1, len(self._regions) + 1):
            t = self._target(k)
            if t != pos_flat:
                edges.append(_Edge(1, k, target_flat=t))
        return _Node(i, j, h, edges)

    def _expand_edge(self, node: _Node, edge: _Edge) -> None:
        spec = self.spec
        cols = spec.cols
        if edge.kind == 0:
            actions = (Action(edge.ident),)
        else:
            target = spec.cell_at(edge.target_flat)
            actions = tuple(greedy_path(Cell(node.i, node.j), target))
        i, j, h = node.i, node.j, node.h
        fovs = []
        cells_per_step = []
        lookup = self.resolver.lookup
        for a in actions:
            di, dj, h = _MOVES[a]
            i = min(max(i + di, 1), spec.rows)
            j = min(max(j + dj, 1), spec.cols)
            cells, flat, scalar = lookup((i - 1) * cols + (j - 1), h)
            fovs.append((flat, scalar))
            cells_per_step.append(cells)
        edge.actions = actions
        edge.step_fovs = fovs
        edge.step_cells = tuple(cells_per_step)
        edge.end_i, edge.end_j, edge.end_h = i, j, h
        edge.length = len(actions)

    def _traverse_edge(self, node: _Node, edge: _Edge) -> float:
        """Apply an edge's dynamics to the simulation belief; return its
        (cached) reward.

        Multi-step rewards discount per step inside the option; pricing the
        whole sweep at the option's start would make distant regions look
        as good as the mass underfoot and drive premature region hopping.
        """
        if edge.actions is None:
            self._expand_edge(node, edge)
        if self.lite:
            if edge.reward is None:
                edge.reward = self._lite_edge_reward(node, edge)
            return edge.reward
        arr = self._arr
        factor = self.factor
        d = self._d
        gamma = self.cfg.discount
        tmap = self._tmap
        dirty = self._dirty
        if edge.reward is None:
            r = 0.0
            disc = 1.0
            for flat, scalar in edge.step_fovs:
                if scalar >= 0:
                    v = arr[scalar]
                    r += disc * (v - d)
                    arr[scalar] = v * factor
                    if scalar in tmap:
                        dirty.add(tmap[scalar])
                elif flat.size:
                    r += disc * (float(arr[flat].sum()) - d)
                    arr[flat] *= factor
                    if tmap:
                        for f in flat.tolist():
                            if f in tmap:
                                dirty.add(tmap[f])
                else:
                    r -= disc * d
                disc *= gamma
            edge.reward = r
        else:
            for flat, scalar in edge.step_fovs:
                if scalar >= 0:
                    arr[scalar] = arr[scalar] * factor
                    if scalar in tmap:
                        dirty.add(tmap[scalar])
                elif flat.size:
                    arr[flat] *= factor
                    if tmap:
                        for f in flat.tolist():
                            if f in tmap:
                                dirty.add(tmap[f])
        return edge.reward

    def _lite_edge_reward(self, node: _Node, edge: _Edge) -> float:
        if edge.kind == 0:
            flat, scalar = edge.step_fovs[0]
            if scalar >= 0:
                return float(self._arr[scalar]) - self._d
            if flat.size:
                return float(self._arr[flat].sum()) - self._d
            return -self._d
        k = edge.ident
        mbar = self._mbars[k - 1]
        ci, cj = self._centroids[k - 1]
        dist = max(math.hypot(node.i - ci, node.j - cj), 1.0)
        return self.cfg.density_factor * mbar / (self._area2 * dist)

    def _simulate(self, root: _Node) -> None:
        cfg = self.cfg
        c_explore = cfg.exploration_c
        gamma = cfg.discount
        node = root
        path = []
        while True:
            edges = node.edges
            n_edges = len(edges)
            prior = 1.0 / n_edges
            sqrt_n = math.sqrt(node.N)
            best_i = 0
            best_u = -math.inf
            child_N = node.child_N
            child_Q = node.child_Q
            for e in range(n_edges):
                u = child_Q[e] + c_explore * prior * sqrt_n / (1.0 + child_N[e])
                if u > best_u:
                    best_u = u
                    best_i = e
            edge = edges[best_i]
            r = self._traverse_edge(node, edge)
            path.append((node, best_i, r, edge.length))
            if edge.child is None:
                edge.child = self._make_node(edge.end_i, edge.end_j, edge.end_h)
                g = self._rollout(edge.end_i, edge.end_j, edge.end_h)
                break
            node = edge.child

        for node, e, r, length in reversed(path):
            g = r + (g if gamma == 1.0 else (gamma ** length) * g)
            node.child_N[e] += 1
            n = node.child_N[e]
            node.child_Q[e] += (g - node.child_Q[e]) / n
            node.N += 1

    def _rollout(self, i: int, j: int, h: int) -> float:
        cfg = self.cfg
        spec = self.spec
        rows, cols = spec
        arr = self._arr
        d = self._d
        factor = self.factor
        lite = self.lite
        gamma = cfg.discount
        lookup = self.resolver.lookup
        u = self._u
        ui = self._ui
        n_regions = len(self._regions)
        budget = cfg.rollout_depth
        g = 0.0
        disc = 1.0

        if n_regions == 0:
            # Primitive-only walk; the common case for the no-regions planner.
            cache = self.resolver.cache
            while budget > 0:
                pick = int(u[ui] * 4.0)
                ui += 1
                di, dj, h = _MOVES[pick]
                i += di
                if i < 1:
                    i = 1
                elif i > rows:
                    i = rows
                j += dj
                if j < 1:
                    j = 1
                elif j > cols:
                    j = cols
                key = ((i - 1) * cols + (j - 1)) * 4 + h
                entry = cache.get(key)
                _, flat, scalar = entry if entry is not None else lookup(
                    (i - 1) * cols + (j - 1), h)
                if scalar >= 0:
                    v = arr[scalar]
                    r = v - d
                    if not lite:
                        arr[scalar] = v * factor
                elif flat.size:
                    r = float(arr[flat].sum()) - d
                    if not lite:
                        arr[flat] *= factor
                else:
                    r = -d
                g += disc * r
                if gamma != 1.0:
                    disc *= gamma
                budget -= 1
            self._ui = ui
            return g

        while budget > 0:
            pos_flat = (i - 1) * cols + (j - 1)
            gotos = [k for k in range(1, n_regions + 1) if self._target(k) != pos_flat]
            pick = int(u[ui] * (4 + len(gotos)))
            ui += 1
            if pick < 4:
                length = 1
                di, dj, h = _MOVES[pick]
                i += di
                if i < 1:
                    i = 1
                elif i > rows:
                    i = rows
                j += dj
                if j < 1:
                    j = 1
                elif j > cols:
                    j = cols
                _, flat, scalar = lookup((i - 1) * cols + (j - 1), h)
                r = self._rollout_step(flat, scalar, arr, d, factor, lite)
            else:
                k = gotos[pick - 4]
                target = self._target(k)
                ti, tj = target // cols + 1, target % cols + 1
                if lite:
                    mbar = self._mbars[k - 1]
                    ci, cj = self._centroids[k - 1]
                    dist = max(math.hypot(i - ci, j - cj), 1.0)
                    r = cfg.density_factor * mbar / (self._area2 * dist)
                else:
                    r = 0.0
                length = 0
                disc_in = 1.0
                # Expansion work: walk the greedy path resolving each step's
                # FOV, exactly as expand_option would.
                while (i, j) != (ti, tj):
                    dr = ti - i
                    dc = tj - j
                    if dr != 0 and (abs(dr) >= abs(dc) or dc == 0):
                        i += 1 if dr > 0 else -1
                        h = 2 if dr > 0 else 0
                    else:
                        j += 1 if dc > 0 else -1
                        h = 1 if dc > 0 else 3
                    _, flat, scalar = lookup((i - 1) * cols + (j - 1), h)
                    length += 1
                    if not lite:
                        r += disc_in * self._rollout_step(flat, scalar, arr, d, factor, False)
                        disc_in *= gamma
            g += disc * r
            if gamma != 1.0:
                disc *= gamma ** length
            budget -= length
        self._ui = ui
        return g

    def _rollout_step(self, flat, scalar, arr, d, factor, lite) -> float:
        if scalar >= 0:
            v = arr[scalar]
            if not lite:
                arr[scalar] = v * factor
                if scalar in self._tmap:
                    self._dirty.add(self._tmap[scalar])
            return v - d
        if not flat.size:
            return -d
        r = float(arr[flat].sum()) - d
        if not lite:
            arr[flat] *= factor
            tmap = self._tmap
            if tmap:
                for f in flat.tolist():
                    if f in tmap:
                        self._dirty.add(tmap[f])
        return r

    def _materialize(self, edge: _Edge) -> Option:
        if edge.kind == 0:
            if edge.actions is None:
                return Option(OptionKind.PRIMITIVE, action=Action(edge.ident))
            return Option(OptionKind.PRIMITIVE, action=Action(edge.ident),
                          swept_cells=edge.step_cells)
        if edge.actions is None:
            return Option(OptionKind.GOTO_ROI, roi_id=edge.ident)
        return Option(OptionKind.GOTO_ROI, roi_id=edge.ident,
                      trajectory=edge.actions, swept_cells=edge.step_cells)

    @staticmethod
    def _edge_describe(edge: _Edge) -> dict:
        if edge.kind == 0:
            return {"kind": "primitive", "action": Action(edge.ident).name.lower()}
        return {"kind": "goto_roi", "roi": edge.ident, "length": edge.length}


# --- receding-horizon baselines ---------------------------------------------

class GreedyPlanner:
    """Moves toward the highest FOV-mass cell within the horizon.

    Every cell at Manhattan distance 1..horizon is scored by the FOV mass
    observable there, oriented by the first step of the greedy path toward
    it; ties fall to the smallest (i, j).  Returns that first step.
    """

    def __init__(self, spec: GridSpec, mask: FovMask, cfg: HorizonConfig, rng=None):
        self.spec = spec
        self.mask = mask
        self.cfg = cfg
        self.resolver = FovResolver(mask, spec)
        self._point = mask.offsets == ((0, 0),)
        offs = []
        for di in range(-cfg.horizon, cfg.horizon + 1):
            rem = cfg.horizon - abs(di)
            for dj in range(-rem, rem + 1):
                if di or dj:
                    offs.append((di, dj))
        offs.sort()
        self._offs = np.asarray(offs, dtype=np.int64)
        self._first = [self._first_action(di, dj) for di, dj in offs]
        self.last_root_stats: list[dict] = []

    @staticmethod
    def _first_action(di: int, dj: int) -> Action:
        if di != 0 and (abs(di) >= abs(dj) or dj == 0):
            return Action.DOWN if di > 0 else Action.UP
        return Action.RIGHT if dj > 0 else Action.LEFT

    def plan(self, belief: BeliefMap, state: AgentState) -> Option:
        rows, cols = self.spec
        pi, pj = state.position
        ii = self._offs[:, 0] + pi
        jj = self._offs[:, 1] + pj
        valid = (ii >= 1) & (ii <= rows) & (jj >= 1) & (jj <= cols)
        idx = np.nonzero(valid)[0]
        if self._point:
            flats = (ii[idx] - 1) * cols + (jj[idx] - 1)
            scores = belief.mass.ravel()[flats]
            best = idx[int(np.argmax(scores))]
            best_score = float(scores.max())
        else:
            arr = belief.mass.ravel()
            lookup = self.resolver.lookup
            best = -1
            best_score = -math.inf
            for n in idx:
                a = self._first[n]
                flat_pos = (ii[n] - 1) * cols + (jj[n] - 1)
                _, flat, scalar = lookup(int(flat_pos), _MOVES[a][2])
                s = arr[scalar] if scalar >= 0 else (arr[flat].sum() if flat.size else 0.0)
                if s > best_score:
                    best_score = float(s)
                    best = int(n)
        action = self._first[best]
        self.last_root_stats = [{
            "option": {"kind": "primitive", "action": action.name.lower()},
            "cell": [int(self._offs[best, 0] + pi), int(self._offs[best, 1] + pj)],
            "score": best_score,
        }]
        return Option(OptionKind.PRIMITIVE, action=action)


class DpsPlanner:
    """Direct policy search: per first action, epsilon-greedy rollouts of
    ``horizon`` steps score cumulative FOV mass under assume-negative
    updates; the first action with the best mean return wins."""

    def __init__(self, spec: GridSpec, mask: FovMask, cfg: HorizonConfig, rng=None):
        self.spec = spec
        self.mask = mask
        self.cfg = cfg
        self.resolver = FovResolver(mask, spec)
        self.rng = np.random.default_rng(cfg.rng_seed if rng is None else rng)
        self.factor = 1.0 - mask.p_tp
        self._point = mask.offsets == ((0, 0),)
        self.last_root_stats: list[dict] = []

    def plan(self, belief: BeliefMap, state: AgentState) -> Option:
        cfg = self.cfg
        rows, cols = self.spec
        arr = belief.mass.ravel().copy()
        lookup = self.resolver.lookup
        factor = self.factor
        # One epsilon draw and one candidate action per rollout step, drawn
        # up front; the candidate is only used on exploration steps.
        n_draws = 4 * cfg.rollouts_per_action * max(cfg.horizon - 1, 0) + 1
        eps_u = self.rng.random(n_draws)
        act_u = self.rng.random(n_draws)
        draw = 0
        means = []
        for first in range(4):
            total = 0.0
            for _ in range(cfg.rollouts_per_action):
                undo = []
                i, j, h = state.position.i, state.position.j, int(state.heading)
                a = first
                g = 0.0
                for t in range(cfg.horizon):
                    if t > 0:
                        if eps_u[draw] < cfg.epsilon:
                            a = int(act_u[draw] * 4.0)
                        else:
                            a = self._locally_best(arr, i, j)
                        draw += 1
                    di, dj, h = _MOVES[a]
                    i += di
                    if i < 1:
                        i = 1
                    elif i > rows:
                        i = rows
                    j += dj
                    if j < 1:
                        j = 1
                    elif j > cols:
                        j = cols
                    _, flat, scalar = lookup((i - 1) * cols + (j - 1), h)
                    if scalar >= 0:
                        v = arr[scalar]
                        g += v
                        undo.append((scalar, v))
                        arr[scalar] = v * factor
                    elif flat.size:
                        vals = arr[flat]
                        g += float(vals.sum())
                        undo.append((flat, vals))
                        arr[flat] = vals * factor
                total += g
                for idx, old in reversed(undo):
                    arr[idx] = old
            means.append(total / cfg.rollouts_per_action)
        best = max(range(4), key=lambda a: (means[a], -a))
        self.last_root_stats = [
            {"option": {"kind": "primitive", "action": Action(a).name.lower()},
             "q": means[a]}
            for a in range(4)
        ]
        return Option(OptionKind.PRIMITIVE, action=Action(best))

    def _locally_best(self, arr, i: int, j: int) -> int:
        rows, cols = self.spec
        if self._point:
            # Point sensor: the post-move FOV is the landing cell itself,
            # whatever the heading.
            up = i - 1 if i > 1 else 1
            down = i + 1 if i < rows else rows
            left = j - 1 if j > 1 else 1
            right = j + 1 if j < cols else cols
            base_i = (i - 1) * cols + (j - 1)
            s0 = arr[base_i - cols] if up != i else arr[base_i]
            s1 = arr[base_i + cols] if down != i else arr[base_i]
            s2 = arr[base_i - 1] if left != j else arr[base_i]
            s3 = arr[base_i + 1] if right != j else arr[base_i]
            best_a = 0
            best_s = s0
            if s1 > best_s:
                best_a, best_s = 1, s1
            if s2 > best_s:
                best_a, best_s = 2, s2
            if s3 > best_s:
                best_a, best_s = 3, s3
            return best_a
        lookup = self.resolver.lookup
        best_a = 0
        best_s = -math.inf
        for a in range(4):
            di, dj, h = _MOVES[a]
            ni = i + di
            if ni < 1:
                ni = 1
            elif ni > rows:
                ni = rows
            nj = j + dj
            if nj < 1:
                nj = 1
            elif nj > cols:
                nj = cols
            _, flat, scalar = lookup((ni - 1) * cols + (nj - 1), h)
            s = arr[scalar] if scalar >= 0 else (arr[flat].sum() if flat.size else 0.0)
            if s > best_s:
                best_s = s
                best_a = a
        return best_a


# --- functional entry points -------------------------------------------------

def puct_plan(belief: BeliefMap, state: AgentState, roi: RoiSet | None,
              mask: FovMask, spec: GridSpec, cfg: PuctConfig) -> Option:
    """One-shot PUCT decision; the variant follows the config type."""
    return PuctPlanner(spec, mask, cfg, roi=roi).plan(belief, state)


def greedy_plan(belief: BeliefMap, state: AgentState, mask: FovMask,
                spec: GridSpec, cfg: HorizonConfig) -> Option:
    return GreedyPlanner(spec, mask, cfg).plan(belief, state)


def dps_plan(belief: BeliefMap, state: AgentState, mask: FovMask,
             spec: GridSpec, cfg: HorizonConfig) -> Option:
    return DpsPlanner(spec, mask, cfg).plan(belief, state)


PLANNER_IDS = ("puct", "puct_regions", "puct_regions_lite", "greedy", "dps")


def make_planner(planner_id: str, spec: GridSpec, mask: FovMask, cfg,
                 roi: RoiSet | None = None, rng=None):
    """Build a planner instance for a harness planner id."""
    if planner_id == "puct":
        return PuctPlanner(spec, mask, cfg, roi=None, rng=rng)
    if planner_id == "puct_regions":
        return PuctPlanner(spec, mask, cfg, roi=roi, rng=rng)
    if planner_id == "puct_regions_lite":
        if not isinstance(cfg, LiteConfig):
            raise TypeError("puct_regions_lite requires a LiteConfig")
        return PuctPlanner(spec, mask, cfg, roi=roi, rng=rng)
    if planner_id == "greedy":
        return GreedyPlanner(spec, mask, cfg, rng=rng)
    if planner_id == "dps":
        return DpsPlanner(spec, mask, cfg, rng=rng)
    raise ValueError(f"unknown planner id {planner_id!r}; expected one of {PLANNER_IDS}")
