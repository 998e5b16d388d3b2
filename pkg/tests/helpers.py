"""Independent reference implementations the tests check the package against.

Everything here is deliberately naive (python loops, linear scans) and shares
no code with the package beyond its public data types.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from beliefsearch.gridworld import Cell


def brute_posterior(prior: np.ndarray, readings, p_tp: float, p_tn: float) -> np.ndarray:
    """Joint-likelihood enumeration over every hypothesis cell.

    ``readings`` is a list of ((i, j) 1-based, positive) pairs.
    """
    rows, cols = prior.shape
    post = np.zeros_like(prior, dtype=np.float64)
    for hi in range(rows):
        for hj in range(cols):
            like = 1.0
            for (ci, cj), positive in readings:
                if (ci - 1, cj - 1) == (hi, hj):
                    like *= p_tp if positive else 1.0 - p_tp
                else:
                    like *= (1.0 - p_tn) if positive else p_tn
            post[hi, hj] = prior[hi, hj] * like
    total = post.sum()
    if total <= 0:
        raise ZeroDivisionError("degenerate evidence")
    return post / total


def scan_seeds(mass: np.ndarray, tau: float) -> list[Cell]:
    """Exhaustive 8-neighborhood maxima scan with the plateau rule: an
    equal-valued connected component qualifies only if nothing adjacent to
    it is greater, and contributes its smallest (i, j) cell."""
    rows, cols = mass.shape

    def neighbors(i, j):
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if (di or dj) and 0 <= i + di < rows and 0 <= j + dj < cols:
                    yield i + di, j + dj

    seeds = []
    seen = np.zeros_like(mass, dtype=bool)
    for i in range(rows):
        for j in range(cols):
            if mass[i, j] < tau or seen[i, j]:
                continue
            value = mass[i, j]
            if any(mass[n] > value for n in neighbors(i, j)):
                continue
            if all(mass[n] < value for n in neighbors(i, j)):
                seeds.append(Cell(i + 1, j + 1))
                continue
            # Plateau: flood the equal-valued component.
            comp = []
            ok = True
            queue = deque([(i, j)])
            seen[i, j] = True
            while queue:
                ci, cj = queue.popleft()
                comp.append((ci, cj))
                for n in neighbors(ci, cj):
                    if mass[n] > value:
                        ok = False
                    elif mass[n] == value and not seen[n]:
                        seen[n] = True
                        queue.append(n)
            if ok:
                bi, bj = min(comp)
                seeds.append(Cell(bi + 1, bj + 1))
    seeds.sort(key=lambda c: (-mass[c.i - 1, c.j - 1], c))
    return seeds


def flood_oracle(mass: np.ndarray, seeds, tau: float) -> np.ndarray:
    """Priority flood by linear scan instead of a heap.

    Queue entries are (mass, entry order); each round claims the 4-neighbors
    of the queued cell with the highest mass (earliest entry on ties).
    Returns the 1-based label matrix (0 = background).
    """
    rows, cols = mass.shape
    labels = np.zeros((rows, cols), dtype=np.int32)
    queue = []
    order = 0
    for k, seed in enumerate(seeds, start=1):
        labels[seed.i - 1, seed.j - 1] = k
        queue.append((mass[seed.i - 1, seed.j - 1], order, seed.i - 1, seed.j - 1))
        order += 1
    while queue:
        best = 0
        for n in range(1, len(queue)):
            m_b, o_b = queue[best][0], queue[best][1]
            m_n, o_n = queue[n][0], queue[n][1]
            if m_n > m_b or (m_n == m_b and o_n < o_b):
                best = n
        _, _, i, j = queue.pop(best)
        lab = labels[i, j]
        for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            ni, nj = i + di, j + dj
            if 0 <= ni < rows and 0 <= nj < cols and labels[ni, nj] == 0 and mass[ni, nj] >= tau:
                labels[ni, nj] = lab
                queue.append((mass[ni, nj], order, ni, nj))
                order += 1
    return labels


def bfs_path_length(rows: int, cols: int, start: Cell, target: Cell) -> int:
    """Shortest 4-connected path length by breadth-first search."""
    if start == target:
        return 0
    dist = {(start.i, start.j): 0}
    queue = deque([(start.i, start.j)])
    while queue:
        i, j = queue.popleft()
        d = dist[(i, j)]
        for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            ni, nj = i + di, j + dj
            if 1 <= ni <= rows and 1 <= nj <= cols and (ni, nj) not in dist:
                if (ni, nj) == (target.i, target.j):
                    return d + 1
                dist[(ni, nj)] = d + 1
                queue.append((ni, nj))
    raise RuntimeError("unreachable target")


def distant_roi_instance():
    """The 20x20 single-distant-blob planning instance.

    Nearly all mass sits in a tight 5x5 blob around (16, 16); the agent
    starts far away at (3, 3).  Travelling to the blob dominates any local
    plan, so a sound options planner must pick the goto at the root.
    Returns (spec, prior, roi, mask, state).
    """
    import numpy as np

    from beliefsearch.gridworld import AgentState, BeliefMap, GridSpec, Heading
    from beliefsearch.roi import segment
    from beliefsearch.sensing import FovMask

    spec = GridSpec(20, 20)
    mass = np.full((20, 20), 1e-9)
    for di in range(-2, 3):
        for dj in range(-2, 3):
            mass[15 + di, 15 + dj] = 0.03 / (1 + abs(di) + abs(dj))
    mass[15, 15] = 0.2
    prior = BeliefMap(spec, mass / mass.sum())
    roi = segment(prior, tau_fraction=0.01)
    assert roi.num_regions == 1
    mask = FovMask(((0, 0),), 0.9, 0.9)
    state = AgentState(Cell(3, 3), Heading.NORTH)
    return spec, prior, roi, mask, state


def plan_value_under_full_dynamics(prior, mask, spec, first_action, target: Cell,
                                   horizon: int, d: float) -> float:
    """Deterministic value of 'optionally one primitive, then walk greedily
    to the target, then sweep greedily' under the planning dynamics.

    Direct simulation with the assume-negative update; no tree involved.
    ``first_action`` of None means start the walk immediately.
    """
    from beliefsearch.gridworld import ACTION_DELTAS, AgentState, Heading
    from beliefsearch.gridworld import step as env_step
    from beliefsearch.options import greedy_path

    arr = prior.mass.copy()
    factor = 1.0 - mask.p_tp
    state = AgentState(Cell(3, 3), Heading.NORTH)
    total = 0.0
    steps = 0

    def visit(cell):
        nonlocal total
        total += arr[cell.i - 1, cell.j - 1] - d
        arr[cell.i - 1, cell.j - 1] *= factor

    if first_action is not None:
        state = env_step(state, first_action, spec)
        visit(state.position)
        steps += 1
    for action in greedy_path(state.position, target):
        state = env_step(state, action, spec)
        visit(state.position)
        steps += 1
    while steps < horizon:
        # Greedy sweep: move to the best 4-neighbor by current mass.
        best = None
        best_v = -1.0
        for action in ACTION_DELTAS:
            di, dj = ACTION_DELTAS[action]
            ni = min(max(state.position.i + di, 1), spec.rows)
            nj = min(max(state.position.j + dj, 1), spec.cols)
            v = arr[ni - 1, nj - 1]
            if v > best_v:
                best_v = v
                best = action
        state = env_step(state, best, spec)
        visit(state.position)
        steps += 1
    return total


def gaussian_block_mass(rows: int, cols: int, mean_yx, var_yx, center: Cell, radius: int) -> float:
    """Direct density evaluation of one axis-aligned Gaussian over the grid;
    returns the normalized mass inside the (2r+1)^2 block around ``center``.

    Means and variances are in normalized coordinates (map extent = 1).
    """
    ys = (np.arange(rows) + 0.5) / rows
    xs = (np.arange(cols) + 0.5) / cols
    my, mx = mean_yx
    vy, vx = var_yx
    dens = np.exp(-((ys[:, None] - my) ** 2) / (2 * vy) - ((xs[None, :] - mx) ** 2) / (2 * vx))
    total = dens.sum()
    i0, j0 = center.i - 1, center.j - 1
    block = dens[max(0, i0 - radius):i0 + radius + 1, max(0, j0 - radius):j0 + radius + 1]
    return float(block.sum() / total)
