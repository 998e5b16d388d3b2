import numpy as np
import pytest

from beliefsearch.gridworld import (
    Action,
    AgentState,
    BeliefMap,
    Cell,
    GridSpec,
    Heading,
    PriorConfig,
    generate_prior,
    sample_target,
    step,
)
from helpers import gaussian_block_mass


class TestGridSpec:
    def test_indices_round_trip(self):
        spec = GridSpec(7, 11)
        for flat in range(spec.size):
            cell = spec.cell_at(flat)
            assert spec.in_bounds(cell)
            assert spec.flat_index(cell) == flat

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            GridSpec(0, 5).validate()


class TestBeliefMap:
    def test_rejects_negative_mass(self):
        with pytest.raises(ValueError):
            BeliefMap(GridSpec(2, 2), np.array([[0.5, 0.5], [0.5, -0.5]]))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            BeliefMap(GridSpec(2, 3), np.ones((2, 2)) / 4)

    def test_mass_is_read_only(self):
        bm = BeliefMap(GridSpec(2, 2), np.full((2, 2), 0.25))
        with pytest.raises(ValueError):
            bm.mass[0, 0] = 1.0

    def test_csv_round_trip(self, tmp_path):
        spec = GridSpec(5, 4)
        bm = generate_prior(spec, PriorConfig(rng_seed=3))
        path = tmp_path / "belief.csv"
        bm.to_csv(path)
        back = BeliefMap.from_csv(path)
        assert back.grid == spec
        np.testing.assert_array_equal(back.mass, bm.mass)

    def test_binary_round_trip_and_header(self, tmp_path):
        bm = generate_prior(GridSpec(6, 9), PriorConfig(rng_seed=4))
        blob = bm.to_bytes()
        assert blob[:4] == b"BMAP"
        assert len(blob) == 16 + 6 * 9 * 8
        back = BeliefMap.from_bytes(blob)
        np.testing.assert_array_equal(back.mass, bm.mass)
        path = tmp_path / "belief.bmap"
        bm.to_binary(path)
        assert BeliefMap.from_binary(path).grid == GridSpec(6, 9)

    def test_from_bytes_rejects_bad_magic(self):
        with pytest.raises(ValueError):
            BeliefMap.from_bytes(b"XXXX" + b"\0" * 20)


class TestGeneratePrior:
    def test_default_prior_is_normalized_with_local_max(self):
        spec = GridSpec(200, 200)
        bm = generate_prior(spec, PriorConfig(rng_seed=12345))
        assert abs(bm.total - 1.0) <= 1e-9
        assert np.all(bm.mass >= 0)
        # At least one strict 8-neighborhood local maximum.
        m = bm.mass
        padded = np.full((202, 202), -np.inf)
        padded[1:-1, 1:-1] = m
        neigh = np.full_like(m, -np.inf)
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di or dj:
                    neigh = np.maximum(neigh, padded[1 + di:201 + di, 1 + dj:201 + dj])
        assert np.any(m > neigh)

    def test_tight_component_concentrates_in_3x3_block(self):
        # Near-zero variance: mass collapses into the block around the mode.
        cfg = PriorConfig(num_components_range=(1, 1), variance_range=(1e-6, 1e-6), rng_seed=77)
        spec = GridSpec(50, 50)
        bm = generate_prior(spec, cfg)
        mode = spec.cell_at(int(np.argmax(bm.mass)))
        i0, j0 = mode.i - 1, mode.j - 1
        block = bm.mass[max(0, i0 - 1):i0 + 2, max(0, j0 - 1):j0 + 2]
        assert block.sum() >= 0.99

    def test_block_mass_threshold_is_right(self):
        # Direct density evaluation: even for a mean on a cell corner (the
        # worst case), sigma = 0.001 of the extent leaves < 1% outside the
        # 3x3 block around the containing cell.
        for mean in [(0.501, 0.501), (0.51, 0.51), (0.4999, 0.52)]:
            covered = gaussian_block_mass(50, 50, mean, (1e-6, 1e-6), Cell(26, 26), radius=1)
            assert covered > 0.99

    def test_identical_seeds_are_bitwise_equal(self):
        spec = GridSpec(40, 30)
        a = generate_prior(spec, PriorConfig(rng_seed=99))
        b = generate_prior(spec, PriorConfig(rng_seed=99))
        assert a.to_bytes() == b.to_bytes()

    def test_rejects_tiny_grids(self):
        with pytest.raises(ValueError):
            generate_prior(GridSpec(1, 5), PriorConfig())

    def test_random_configs_always_valid(self):
        # Invariant sweep: many random configs, all normalized and non-negative.
        rng = np.random.default_rng(2024)
        for trial in range(1000):
            rows = int(rng.integers(2, 25))
            cols = int(rng.integers(2, 25))
            lo = int(rng.integers(1, 4))
            hi = int(rng.integers(lo, 7))
            vlo = float(rng.uniform(1e-4, 0.1))
            vhi = float(rng.uniform(vlo, 0.2))
            cfg = PriorConfig((lo, hi), (vlo, vhi), int(rng.integers(0, 2**32)))
            bm = generate_prior(GridSpec(rows, cols), cfg)
            assert np.all(bm.mass >= 0)
            assert abs(bm.total - 1.0) <= 1e-9

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PriorConfig(num_components_range=(0, 3))
        with pytest.raises(ValueError):
            PriorConfig(num_components_range=(4, 2))
        with pytest.raises(ValueError):
            PriorConfig(variance_range=(0.0, 0.1))


class TestSampleTarget:
    def test_point_mass(self):
        mass = np.zeros((5, 8))
        mass[2, 6] = 1.0
        prior = BeliefMap(GridSpec(5, 8), mass)
        for seed in range(20):
            assert sample_target(prior, seed) == Cell(3, 7)

    def test_two_cell_frequencies(self):
        prior = BeliefMap(GridSpec(2, 1), np.array([[0.5], [0.5]]))
        rng = np.random.default_rng(5)
        n = 100_000
        hits = sum(sample_target(prior, rng) == Cell(1, 1) for _ in range(n))
        assert abs(hits / n - 0.5) <= 0.01

    def test_zero_mass_cell_never_sampled(self):
        mass = np.array([[0.25, 0.0], [0.25, 0.5]])
        prior = BeliefMap(GridSpec(2, 2), mass)
        rng = np.random.default_rng(6)
        assert all(sample_target(prior, rng) != Cell(1, 2) for _ in range(100_000))

    def test_empirical_convergence_to_prior(self):
        spec = GridSpec(3, 3)
        prior = generate_prior(spec, PriorConfig(rng_seed=8))
        rng = np.random.default_rng(9)
        counts = np.zeros(spec.size)
        n = 100_000
        for _ in range(n):
            counts[spec.flat_index(sample_target(prior, rng))] += 1
        assert np.max(np.abs(counts / n - prior.mass.ravel())) <= 0.01

    def test_requires_normalized_prior(self):
        with pytest.raises(ValueError):
            sample_target(BeliefMap(GridSpec(2, 2), np.full((2, 2), 1.0)), 0)


class TestStep:
    def test_clamps_at_border_but_turns(self):
        spec = GridSpec(10, 10)
        out = step(AgentState(Cell(1, 1), Heading.EAST), Action.UP, spec)
        assert out == AgentState(Cell(1, 1), Heading.NORTH)

    def test_moves_right(self):
        out = step(AgentState(Cell(5, 5), Heading.NORTH), Action.RIGHT, GridSpec(10, 10))
        assert out == AgentState(Cell(5, 6), Heading.EAST)

    def test_two_lefts(self):
        spec = GridSpec(10, 10)
        s = AgentState(Cell(2, 3), Heading.NORTH)
        s = step(s, Action.LEFT, spec)
        s = step(s, Action.LEFT, spec)
        assert s == AgentState(Cell(2, 1), Heading.WEST)

    def test_never_leaves_grid_and_is_pure(self):
        spec = GridSpec(4, 3)
        rng = np.random.default_rng(11)
        state = AgentState(Cell(2, 2), Heading.NORTH)
        for _ in range(500):
            action = Action(int(rng.integers(4)))
            before = state
            state = step(state, action, spec)
            assert spec.in_bounds(state.position)
            assert before == before  # untouched input
            assert state.heading == {
                Action.UP: Heading.NORTH,
                Action.DOWN: Heading.SOUTH,
                Action.LEFT: Heading.WEST,
                Action.RIGHT: Heading.EAST,
            }[action]
