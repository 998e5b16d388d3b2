"""Region-of-interest segmentation of the prior map.

Seeds are the 8-neighborhood local maxima at or above a mass threshold; a
priority flood then grows each seed through 4-connected neighbors in
descending mass order until the mass drops below the threshold or another
region got there first.  Segmentation runs once on the initial prior; only
the per-region target cell tracks the live belief afterwards.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass

import numpy as np

from .gridworld import BeliefMap, Cell, GridSpec

# Flood order: up, down, left, right.  Fixed so queue-entry tie-breaking
# (and therefore the whole labeling) is deterministic.
_FLOOD_STEPS = ((-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass(frozen=True)
class RoiSet:
    """Watershed labeling plus the per-region statistics planners consume.

    ``labels`` holds 0 for background and 1..Q for regions.  Region k's
    cells, in row-major order, are ``region_flat_indices[k-1]`` (0-based
    raveled indices into the prior's mass array).
    """

    grid: GridSpec
    labels: np.ndarray
    seeds: tuple[Cell, ...]
    threshold: float
    centroids: tuple[tuple[float, float], ...]
    cell_counts: tuple[int, ...]
    mean_masses: tuple[float, ...]
    region_flat_indices: tuple[np.ndarray, ...]

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def num_regions(self) -> int:
        return len(self.seeds)

    def region_cells(self, k: int) -> list[Cell]:
        return [self.grid.cell_at(int(f)) for f in self.region_flat_indices[k - 1]]

    def to_label_csv(self, path) -> None:
        np.savetxt(path, self.labels, delimiter=",", fmt="%d")

    def summary_dict(self) -> dict:
        return {
            "num_regions": self.num_regions,
            "threshold": self.threshold,
            "regions": [
                {
                    "id": k + 1,
                    "seed": list(self.seeds[k]),
                    "centroid": list(self.centroids[k]),
                    "cell_count": self.cell_counts[k],
                    "mean_mass": self.mean_masses[k],
                }
                for k in range(self.num_regions)
            ],
        }

    def to_summary_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary_dict(), fh, indent=2)


def relative_threshold(prior: BeliefMap, fraction: float = 0.25) -> float:
    """Threshold as a fraction of the global maximum cell mass."""
    if not (0.0 < fraction < 1.0):
        raise ValueError(f"threshold fraction must lie in (0, 1), got {fraction}")
    return fraction * float(prior.mass.max())


def find_seeds(prior: BeliefMap, tau: float) -> list[Cell]:
    """Cells that are 8-neighborhood maxima with mass >= tau.

    Strict maxima qualify directly.  A flat plateau qualifies only when no
    cell of the equal-valued connected component has a strictly greater
    neighbor, and contributes its lexicographically smallest cell.  Sorted
    by descending mass, ties by (i, j).
    """
    m = prior.mass
    rows, cols = m.shape
    padded = np.full((rows + 2, cols + 2), -np.inf)
    padded[1:-1, 1:-1] = m
    neigh_max = np.full_like(m, -np.inf)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            np.maximum(neigh_max, padded[1 + di:rows + 1 + di, 1 + dj:cols + 1 + dj],
                       out=neigh_max)

    eligible = m >= tau
    seeds = [Cell(int(i) + 1, int(j) + 1)
             for i, j in zip(*np.nonzero(eligible & (m > neigh_max)))]

    # Plateau cells: no greater neighbor, at least one equal one.
    flat = eligible & (m == neigh_max)
    visited = np.zeros_like(flat)
    for i0, j0 in zip(*np.nonzero(flat)):
        if visited[i0, j0]:
            continue
        # Walk the whole equal-valued component, including cells that touch
        # something greater; any such cell disqualifies the plateau.
        value = m[i0, j0]
        stack = [(int(i0), int(j0))]
        visited[i0, j0] = True
        component = []
        is_max = True
        while stack:
            i, j = stack.pop()
            component.append((i, j))
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    if di == 0 and dj == 0:
                        continue
                    ni, nj = i + di, j + dj
                    if not (0 <= ni < rows and 0 <= nj < cols):
                        continue
                    if m[ni, nj] > value:
                        is_max = False
                    elif m[ni, nj] == value and not visited[ni, nj]:
                        visited[ni, nj] = True
                        stack.append((ni, nj))
        if is_max:
            i, j = min(component)
            seeds.append(Cell(i + 1, j + 1))

    seeds.sort(key=lambda c: (-prior.mass_at(c), c))
    return seeds


def watershed(prior: BeliefMap, seeds, tau: float) -> RoiSet:
    """Grow each seed's region by priority flood.

    A max-heap on cell mass (queue-entry order breaking ties) pops the
    highest frontier cell; its unclaimed 4-neighbors with mass >= tau join
    that cell's region.  A cell is claimed by the first region to reach it.
    """
    m = prior.mass
    rows, cols = m.shape
    labels = np.zeros((rows, cols), dtype=np.int32)

    heap = []
    counter = 0
    for k, seed in enumerate(seeds, start=1):
        if labels[seed.i - 1, seed.j - 1] != 0:
            raise ValueError(f"duplicate seed {seed}")
        if m[seed.i - 1, seed.j - 1] < tau:
            raise ValueError(f"seed {seed} lies below the threshold")
        labels[seed.i - 1, seed.j - 1] = k
        heapq.heappush(heap, (-m[seed.i - 1, seed.j - 1], counter, seed.i - 1, seed.j - 1))
        counter += 1

    while heap:
        _, _, i, j = heapq.heappop(heap)
        lab = labels[i, j]
        for di, dj in _FLOOD_STEPS:
            ni, nj = i + di, j + dj
            if 0 <= ni < rows and 0 <= nj < cols and labels[ni, nj] == 0 and m[ni, nj] >= tau:
                labels[ni, nj] = lab
                heapq.heappush(heap, (-m[ni, nj], counter, ni, nj))
                counter += 1

    flat_labels = labels.ravel()
    centroids = []
    counts = []
    means = []
    indices = []
    for k in range(1, len(seeds) + 1):
        region = np.nonzero(flat_labels == k)[0]
        ii = region // cols + 1
        jj = region % cols + 1
        centroids.append((float(ii.mean()), float(jj.mean())))
        counts.append(int(region.size))
        means.append(float(m.ravel()[region].mean()))
        indices.append(region)
    return RoiSet(
        grid=prior.grid,
        labels=labels,
        seeds=tuple(seeds),
        threshold=float(tau),
        centroids=tuple(centroids),
        cell_counts=tuple(counts),
        mean_masses=tuple(means),
        region_flat_indices=tuple(indices),
    )


def segment(prior: BeliefMap, tau: float | None = None, tau_fraction: float = 0.25) -> RoiSet:
    """Find seeds and flood in one call; tau defaults to a fraction of the
    prior's maximum cell mass."""
    if tau is None:
        tau = relative_threshold(prior, tau_fraction)
    return watershed(prior, find_seeds(prior, tau), tau)


def roi_target_cell(roi: RoiSet, k: int, belief: BeliefMap) -> Cell:
    """Most probable cell of region k under the live belief.

    Membership is frozen from segmentation time; only the argmax tracks the
    belief.  Ties break toward the smallest (i, j).
    """
    if not (1 <= k <= roi.num_regions):
        raise ValueError(f"region id {k} out of range 1..{roi.num_regions}")
    region = roi.region_flat_indices[k - 1]
    vals = belief.mass.ravel()[region]
    return roi.grid.cell_at(int(region[int(np.argmax(vals))]))
