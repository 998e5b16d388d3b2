"""Seeded episode execution and batch experiments.

Every trial derives its RNG streams from (master seed, trial index) alone,
so batch results are independent of worker count and execution order.  The
simulator applies the exact joint Bayes update after every primitive step;
planner-side approximations never leak into the environment.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .gridworld import (
    AgentState,
    Cell,
    GridSpec,
    Heading,
    PriorConfig,
    generate_prior,
    sample_target,
    step,
)
from .options import expand_option
from .planners import (
    HorizonConfig,
    LiteConfig,
    PuctConfig,
    PLANNER_IDS,
    make_planner,
)
from .roi import segment
from .sensing import FovResolver, exact_posterior, load_mask, sample_observation

REGION_PLANNERS = ("puct_regions", "puct_regions_lite")
SUMMARY_PERCENTILES = (5, 25, 50, 75, 95)


def default_planner_config(planner_id: str):
    if planner_id == "puct_regions_lite":
        return LiteConfig()
    if planner_id in ("puct", "puct_regions"):
        return PuctConfig()
    if planner_id in ("greedy", "dps"):
        return HorizonConfig()
    raise ValueError(f"unknown planner id {planner_id!r}; expected one of {PLANNER_IDS}")


@dataclass(frozen=True)
class EpisodeConfig:
    """Everything one trial needs; fully picklable for worker pools."""

    grid: GridSpec = GridSpec(200, 200)
    prior: PriorConfig = PriorConfig()
    mask: str = "point"
    p_tp: float = 0.9
    p_tn: float = 0.9
    planner: str = "puct"
    planner_config: PuctConfig | LiteConfig | HorizonConfig | None = None
    tau_fraction: float = 0.25
    tau_abs: float | None = None
    max_steps: int = 20000
    master_seed: int = 0
    trial_index: int = 0
    start_heading: Heading = Heading.NORTH
    trace_path: str | None = None

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.planner not in PLANNER_IDS:
            raise ValueError(
                f"unknown planner id {self.planner!r}; expected one of {PLANNER_IDS}"
            )

    def resolved_planner_config(self):
        return self.planner_config or default_planner_config(self.planner)


@dataclass(frozen=True)
class EpisodeRecord:
    """Per-trial outcome.

    ``steps_to_find`` counts primitive steps, including those inside
    options; capped trials carry ``found=False`` and the step cap.  Plan
    times are wall-clock and therefore the one non-reproducible field.
    """

    trial_index: int
    planner: str
    found: bool
    steps_to_find: int
    plan_times_us: tuple[float, ...]
    coverage_fraction: float
    trace_path: str | None = None

    @property
    def decisions(self) -> int:
        return len(self.plan_times_us)


def trial_seed_streams(master_seed: int, trial_index: int):
    """Five independent SeedSequences: prior, target, start, observations,
    planner.  Stable under any execution order."""
    root = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    return root.spawn(5)


def run_episode(cfg: EpisodeConfig) -> EpisodeRecord:
    """Run one seeded trial to detection or the step cap."""
    spec = cfg.grid
    mask = load_mask(cfg.mask, cfg.p_tp, cfg.p_tn)
    prior_ss, target_ss, start_ss, obs_ss, plan_ss = trial_seed_streams(
        cfg.master_seed, cfg.trial_index
    )

    prior_seed = int(prior_ss.generate_state(1, np.uint64)[0])
    prior = generate_prior(spec, replace(cfg.prior, rng_seed=prior_seed))
    target = sample_target(prior, target_ss)

    start_rng = np.random.default_rng(start_ss)
    start = Cell(
        int(start_rng.integers(1, spec.rows + 1)),
        int(start_rng.integers(1, spec.cols + 1)),
    )
    state = AgentState(start, cfg.start_heading)

    roi = None
    if cfg.planner in REGION_PLANNERS:
        roi = segment(prior, tau=cfg.tau_abs, tau_fraction=cfg.tau_fraction)
    planner = make_planner(
        cfg.planner, spec, mask, cfg.resolved_planner_config(), roi=roi,
        rng=np.random.default_rng(plan_ss),
    )

    resolver = FovResolver(mask, spec)
    obs_rng = np.random.default_rng(obs_ss)
    observed = np.zeros(spec.size, dtype=bool)
    belief = prior
    trace = [] if cfg.trace_path else None

    def look(st: AgentState) -> bool:
        """Observe once; update coverage and belief; True when the target's
        cell reads positive."""
        nonlocal belief
        cells, flat, _ = resolver.lookup(spec.flat_index(st.position), int(st.heading))
        if not cells:
            return False
        observed[flat] = True
        obs = sample_observation(cells, target, mask, obs_rng)
        if obs.positive_at(target):
            return True
        belief = exact_posterior(belief, obs, mask)
        return False

    found = look(state)
    steps = 0
    plan_times = []

    while not found and steps < cfg.max_steps:
        t0 = time.perf_counter_ns()
        option = planner.plan(belief, state)
        plan_times.append((time.perf_counter_ns() - t0) / 1000.0)
        if not option.is_expanded:
            option = expand_option(option, state, roi, belief, mask, spec, resolver)
        if trace is not None:
            trace.append({
                "type": "decision",
                "index": len(plan_times) - 1,
                "step": steps,
                "option": option.describe(),
                "root": planner.last_root_stats,
                "plan_us": plan_times[-1],
            })
        if not option.trajectory:
            raise RuntimeError("planner returned an empty option")  # unreachable
        for action in option.trajectory:
            state = step(state, action, spec)
            steps += 1
            if look(state):
                found = True
                break
            if steps >= cfg.max_steps:
                break

    record = EpisodeRecord(
        trial_index=cfg.trial_index,
        planner=cfg.planner,
        found=found,
        steps_to_find=steps,
        plan_times_us=tuple(plan_times),
        coverage_fraction=float(observed.sum()) / spec.size,
        trace_path=cfg.trace_path,
    )
    if trace is not None:
        _write_trace(cfg, record, target, trace)
    return record


def _write_trace(cfg: EpisodeConfig, record: EpisodeRecord, target: Cell, decisions: list) -> None:
    header = {
        "type": "header",
        "planner": cfg.planner,
        "grid": [cfg.grid.rows, cfg.grid.cols],
        "mask": cfg.mask,
        "master_seed": cfg.master_seed,
        "trial_index": cfg.trial_index,
        "target": [target.i, target.j],
        "found": record.found,
        "steps_to_find": record.steps_to_find,
        "coverage_fraction": record.coverage_fraction,
    }
    with open(cfg.trace_path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for line in decisions:
            fh.write(json.dumps(line) + "\n")


def percentiles(values, ps=SUMMARY_PERCENTILES) -> list[float]:
    """Linear-interpolation percentiles with inclusive endpoints."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("percentiles of an empty sequence are undefined")
    return [float(v) for v in np.percentile(arr, list(ps))]


def _percentile_table(values) -> dict:
    return {f"p{p}": v for p, v in zip(SUMMARY_PERCENTILES, percentiles(values))}


def batch_summary(records) -> dict:
    """Percentile tables over a batch, reporting capped trials both ways:
    included at the step cap, and excluded."""
    records = list(records)
    steps_all = [r.steps_to_find for r in records]
    steps_found = [r.steps_to_find for r in records if r.found]
    pooled_times = [t for r in records for t in r.plan_times_us]
    return {
        "n_trials": len(records),
        "planner": records[0].planner if records else None,
        "found_rate": sum(r.found for r in records) / len(records),
        "steps": _percentile_table(steps_all),
        "steps_found_only": _percentile_table(steps_found) if steps_found else None,
        "coverage": _percentile_table([r.coverage_fraction for r in records]),
        "plan_time_us": _percentile_table(pooled_times) if pooled_times else None,
        "decisions_total": sum(r.decisions for r in records),
    }


def _run_trial(cfg: EpisodeConfig) -> EpisodeRecord:
    return run_episode(cfg)


def run_batch(base_cfg: EpisodeConfig, n_trials: int, workers: int | None = None):
    """Run trials 0..n_trials-1; returns (records, summary).

    Trials are independent and execute across a process pool; results are
    identical for any worker count.
    """
    if n_trials < 1:
        raise ValueError("need at least one trial")
    configs = []
    for i in range(n_trials):
        trace = base_cfg.trace_path
        if trace is not None and "{trial}" in trace:
            trace = trace.format(trial=i)
        configs.append(replace(base_cfg, trial_index=i, trace_path=trace))
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or n_trials == 1:
        records = [run_episode(c) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial, configs))
    return records, batch_summary(records)
