"""Discrete search environment: grid geometry, agent kinematics, prior map
generation, and target placement.

Conventions
-----------
- Cells are 1-based (row i, col j) with 1 <= i <= rows and 1 <= j <= cols.
  Row indices grow downward, so action UP decreases i.
- Belief maps store float64 mass row-major; cell (1, 1) maps to entry [0, 0].
- All types are immutable values; operations are pure and return new values.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

import numpy as np

BINARY_MAGIC = b"BMAP"
_BINARY_HEADER = struct.Struct("<4sIII")  # magic, rows, cols, reserved=0


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3


class Heading(IntEnum):
    NORTH = 0
    EAST = 1
    SOUTH = 2
    WEST = 3


# (di, dj) per action; rows grow downward.
ACTION_DELTAS = {
    Action.UP: (-1, 0),
    Action.DOWN: (1, 0),
    Action.LEFT: (0, -1),
    Action.RIGHT: (0, 1),
}

ACTION_HEADINGS = {
    Action.UP: Heading.NORTH,
    Action.DOWN: Heading.SOUTH,
    Action.LEFT: Heading.WEST,
    Action.RIGHT: Heading.EAST,
}


class Cell(NamedTuple):
    i: int
    j: int


class GridSpec(NamedTuple):
    rows: int
    cols: int

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def validate(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid dimensions must be positive, got {self}")

    def in_bounds(self, cell: Cell) -> bool:
        return 1 <= cell.i <= self.rows and 1 <= cell.j <= self.cols

    def flat_index(self, cell: Cell) -> int:
        """Row-major 0-based index of a 1-based cell."""
        return (cell.i - 1) * self.cols + (cell.j - 1)

    def cell_at(self, flat: int) -> Cell:
        return Cell(flat // self.cols + 1, flat % self.cols + 1)


class AgentState(NamedTuple):
    position: Cell
    heading: Heading


@dataclass(frozen=True)
class BeliefMap:
    """Per-cell target-location mass over a grid.

    Mass is non-negative.  Normalizing constructors and operations leave the
    entries summing to 1 within 1e-9; planner-side updates intentionally
    produce unnormalized maps, so normalization is checked, not assumed.
    """

    grid: GridSpec
    mass: np.ndarray

    NORM_TOL = 1e-9

    def __post_init__(self):
        arr = np.ascontiguousarray(self.mass, dtype=np.float64)
        if arr.shape != (self.grid.rows, self.grid.cols):
            raise ValueError(
                f"mass shape {arr.shape} does not match grid {self.grid}"
            )
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("belief mass must be finite and non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "mass", arr)

    @property
    def total(self) -> float:
        return float(self.mass.sum())

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.total - 1.0) <= tol

    def mass_at(self, cell: Cell) -> float:
        return float(self.mass[cell.i - 1, cell.j - 1])

    def normalized(self) -> "BeliefMap":
        total = self.total
        if total <= 0:
            raise ValueError("cannot normalize an all-zero belief map")
        return BeliefMap(self.grid, self.mass / total)

    # --- serialization ---------------------------------------------------

    def to_csv(self, path) -> None:
        """Row-major CSV, one line per grid row, float64 round-trip safe."""
        np.savetxt(path, self.mass, delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, path, grid: GridSpec | None = None) -> "BeliefMap":
        arr = np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))
        if grid is None:
            grid = GridSpec(*arr.shape)
        return cls(grid, arr)

    def to_bytes(self) -> bytes:
        header = _BINARY_HEADER.pack(BINARY_MAGIC, self.grid.rows, self.grid.cols, 0)
        return header + self.mass.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "BeliefMap":
        if len(blob) < _BINARY_HEADER.size:
            raise ValueError("belief blob shorter than header")
        magic, rows, cols, _ = _BINARY_HEADER.unpack_from(blob)
        if magic != BINARY_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {BINARY_MAGIC!r}")
        expected = _BINARY_HEADER.size + rows * cols * 8
        if len(blob) != expected:
            raise ValueError(f"belief blob length {len(blob)}, expected {expected}")
        arr = np.frombuffer(blob, dtype="<f8", offset=_BINARY_HEADER.size)
        return cls(GridSpec(rows, cols), arr.reshape(rows, cols).copy())

    def to_binary(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def from_binary(cls, path) -> "BeliefMap":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


@dataclass(frozen=True)
class PriorConfig:
    """Gaussian-mixture prior parameters.

    Variances are read in normalized map coordinates (width = height = 1).
    The default range puts each component's sigma between 4% and 12% of the
    map extent, giving a handful of compact high-probability regions; much
    wider components flatten the prior until the top few thousand cells
    carry almost no excess mass and search within any step budget becomes
    hopeless.
    """

    num_components_range: tuple[int, int] = (1, 5)
    variance_range: tuple[float, float] = (0.0016, 0.0144)
    rng_seed: int = 0

    def __post_init__(self):
        lo, hi = self.num_components_range
        if lo < 1 or lo > hi:
            raise ValueError(f"bad component range {self.num_components_range}")
        vlo, vhi = self.variance_range
        if vlo <= 0 or vlo > vhi:
            raise ValueError(f"bad variance range {self.variance_range}")


def generate_prior(spec: GridSpec, cfg: PriorConfig) -> BeliefMap:
    """Sample a mixture-of-Gaussians prior and normalize it over the grid.

    Component count is uniform over ``cfg.num_components_range``; each
    component draws its mean uniformly over the unit square and one variance
    per axis from ``cfg.variance_range``.  Densities are evaluated at cell
    centres in log space with a shared offset, which keeps very tight
    components from underflowing to an all-zero map.  Deterministic for a
    fixed ``cfg.rng_seed``.
    """
    spec.validate()
    if spec.rows < 2 or spec.cols < 2:
        raise ValueError(f"prior generation requires at least a 2x2 grid, got {spec}")
    rng = np.random.default_rng(cfg.rng_seed)
    k = int(rng.integers(cfg.num_components_range[0], cfg.num_components_range[1] + 1))

    # Cell centres in normalized coordinates.
    ys = (np.arange(spec.rows, dtype=np.float64) + 0.5) / spec.rows
    xs = (np.arange(spec.cols, dtype=np.float64) + 0.5) / spec.cols

    log_parts = np.empty((k, spec.rows, spec.cols))
    vlo, vhi = cfg.variance_range
    for c in range(k):
        mean_y = rng.uniform(0.0, 1.0)
        mean_x = rng.uniform(0.0, 1.0)
        var_y = rng.uniform(vlo, vhi)
        var_x = rng.uniform(vlo, vhi)
        log_norm = -0.5 * np.log(4.0 * np.pi**2 * var_y * var_x)
        ly = -((ys - mean_y) ** 2) / (2.0 * var_y)
        lx = -((xs - mean_x) ** 2) / (2.0 * var_x)
        log_parts[c] = log_norm + ly[:, None] + lx[None, :]

    offset = log_parts.max()
    dens = np.exp(log_parts - offset).sum(axis=0)
    return BeliefMap(spec, dens / dens.sum())


def sample_target(prior: BeliefMap, seed) -> Cell:
    """Draw one cell from the categorical distribution given by ``prior``."""
    if not prior.is_normalized():
        raise ValueError("target sampling requires a normalized prior")
    rng = np.random.default_rng(seed)
    cum = np.cumsum(prior.mass.ravel())
    flat = int(np.searchsorted(cum, rng.random(), side="right"))
    return prior.grid.cell_at(min(flat, prior.grid.size - 1))


def step(state: AgentState, action: Action, spec: GridSpec) -> AgentState:
    """Move one cell, clamped at the border; heading follows the action."""
    di, dj = ACTION_DELTAS[action]
    i = min(max(state.position.i + di, 1), spec.rows)
    j = min(max(state.position.j + dj, 1), spec.cols)
    return AgentState(Cell(i, j), ACTION_HEADINGS[action])
