"""Command-line front end: INI-style configs, batch benchmarks, single-episode
debugging, and segmentation inspection.

Exit codes: 0 success, 1 runtime I/O failure, 2 configuration error.  Every
run writes a manifest with all defaults materialized before any trial starts;
re-running from the manifest reproduces results.csv byte for byte.  Wall-clock
timings are therefore kept out of results.csv and live in timings.csv and the
summary percentiles instead.
"""

from __future__ import annotations

import argparse
import colorsys
import configparser
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .gridworld import GridSpec, Heading, PriorConfig, generate_prior
from .harness import (
    EpisodeConfig,
    REGION_PLANNERS,
    batch_summary,
    run_batch,
    run_episode,
    trial_seed_streams,
)
from .planners import HorizonConfig, LiteConfig, PLANNER_IDS, PuctConfig
from .roi import segment
from .sensing import load_mask


class ConfigError(Exception):
    """Configuration problem; maps to exit code 2 with a diagnostic."""


_RUN_DEFAULTS = {
    "grid": "200x200",
    "mask": "point",
    "p_tp": "0.9",
    "p_tn": "0.9",
    "planner": "puct",
    "trials": "1",
    "seed": "0",
    "max_steps": "20000",
    "tau_fraction": "0.25",
    "tau_abs": "",
    "start_heading": "north",
}

_PRIOR_DEFAULTS = {
    "components_min": "1",
    "components_max": "5",
    "variance_min": "0.0016",
    "variance_max": "0.0144",
}

_PUCT_DEFAULTS = {
    "iterations": "40",
    "rollout_depth": "60",
    "exploration": "0.5",
    "time_penalty": "auto",
    "discount": "0.97",
}

_LITE_DEFAULTS = {"density_factor": "8e-6"}

_HORIZON_DEFAULTS = {"horizon": "20", "epsilon": "0.65", "rollouts_per_action": "10"}


def _convert(raw: str, kind, where: str):
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {kind.__name__}") from None


def _parse_grid(raw: str, where: str) -> GridSpec:
    parts = raw.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"{where}: grid must look like ROWSxCOLS, got {raw!r}")
    return GridSpec(_convert(parts[0], int, where), _convert(parts[1], int, where))


def _parse_heading(raw: str, where: str) -> Heading:
    try:
        return Heading[raw.strip().upper()]
    except KeyError:
        raise ConfigError(f"{where}: unknown heading {raw!r}") from None


@dataclass
class Scenario:
    """One fully resolved batch: every field materialized, JSON-serializable."""

    name: str
    planner: str
    grid: GridSpec
    mask: str
    p_tp: float
    p_tn: float
    trials: int
    max_steps: int
    tau_fraction: float
    tau_abs: float | None
    start_heading: Heading
    prior_components: tuple[int, int]
    prior_variance: tuple[float, float]
    planner_params: dict

    def to_manifest(self) -> dict:
        return {
            "name": self.name,
            "planner": self.planner,
            "grid": [self.grid.rows, self.grid.cols],
            "mask": self.mask,
            "p_tp": self.p_tp,
            "p_tn": self.p_tn,
            "trials": self.trials,
            "max_steps": self.max_steps,
            "tau_fraction": self.tau_fraction,
            "tau_abs": self.tau_abs,
            "start_heading": self.start_heading.name.lower(),
            "prior_components": list(self.prior_components),
            "prior_variance": list(self.prior_variance),
            "planner_params": self.planner_params,
        }

    @classmethod
    def from_manifest(cls, blob: dict) -> "Scenario":
        return cls(
            name=blob["name"],
            planner=blob["planner"],
            grid=GridSpec(*blob["grid"]),
            mask=blob["mask"],
            p_tp=blob["p_tp"],
            p_tn=blob["p_tn"],
            trials=blob["trials"],
            max_steps=blob["max_steps"],
            tau_fraction=blob["tau_fraction"],
            tau_abs=blob.get("tau_abs"),
            start_heading=_parse_heading(blob["start_heading"], "manifest"),
            prior_components=tuple(blob["prior_components"]),
            prior_variance=tuple(blob["prior_variance"]),
            planner_params=dict(blob["planner_params"]),
        )

    def planner_config(self):
        p = self.planner_params
        if self.planner in ("puct", "puct_regions"):
            return PuctConfig(
                iterations=p["iterations"],
                rollout_depth=p["rollout_depth"],
                exploration_c=p["exploration"],
                time_penalty=p["time_penalty"],
                discount=p["discount"],
            )
        if self.planner == "puct_regions_lite":
            return LiteConfig(
                iterations=p["iterations"],
                rollout_depth=p["rollout_depth"],
                exploration_c=p["exploration"],
                time_penalty=p["time_penalty"],
                discount=p["discount"],
                density_factor=p["density_factor"],
            )
        return HorizonConfig(
            horizon=p["horizon"],
            epsilon=p["epsilon"],
            rollouts_per_action=p["rollouts_per_action"],
        )

    def episode_config(self, master_seed: int, trace_path: str | None = None) -> EpisodeConfig:
        return EpisodeConfig(
            grid=self.grid,
            prior=PriorConfig(self.prior_components, self.prior_variance),
            mask=self.mask,
            p_tp=self.p_tp,
            p_tn=self.p_tn,
            planner=self.planner,
            planner_config=self.planner_config(),
            tau_fraction=self.tau_fraction,
            tau_abs=self.tau_abs,
            max_steps=self.max_steps,
            master_seed=master_seed,
            start_heading=self.start_heading,
            trace_path=trace_path,
        )


def _read_config(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    found = parser.read(path)
    if not found:
        raise ConfigError(f"config file not found: {path}")
    return parser


def _section(parser, name: str) -> dict:
    return dict(parser[name]) if parser is not None and parser.has_section(name) else {}


def _planner_params(planner: str, parser, where: str) -> dict:
    if planner in ("puct", "puct_regions", "puct_regions_lite"):
        vals = dict(_PUCT_DEFAULTS)
        vals.update(_section(parser, "puct"))
        params = {
            "iterations": _convert(vals["iterations"], int, f"{where} [puct] iterations"),
            "rollout_depth": _convert(vals["rollout_depth"], int, f"{where} [puct] rollout_depth"),
            "exploration": _convert(vals["exploration"], float, f"{where} [puct] exploration"),
            "discount": _convert(vals["discount"], float, f"{where} [puct] discount"),
            "time_penalty": None
            if vals["time_penalty"].strip().lower() == "auto"
            else _convert(vals["time_penalty"], float, f"{where} [puct] time_penalty"),
        }
        if planner == "puct_regions_lite":
            lite = dict(_LITE_DEFAULTS)
            lite.update(_section(parser, "lite"))
            params["density_factor"] = _convert(
                lite["density_factor"], float, f"{where} [lite] density_factor"
            )
        return params
    vals = dict(_HORIZON_DEFAULTS)
    vals.update(_section(parser, "horizon"))
    return {
        "horizon": _convert(vals["horizon"], int, f"{where} [horizon] horizon"),
        "epsilon": _convert(vals["epsilon"], float, f"{where} [horizon] epsilon"),
        "rollouts_per_action": _convert(
            vals["rollouts_per_action"], int, f"{where} [horizon] rollouts_per_action"
        ),
    }


def _build_scenario(name: str, run_vals: dict, parser, overrides: dict, where: str) -> Scenario:
    vals = dict(run_vals)
    for key, val in overrides.items():
        if val is not None:
            vals[key] = str(val)
    planner = vals["planner"]
    if planner not in PLANNER_IDS:
        raise ConfigError(f"{where}: unknown planner {planner!r}; expected one of {PLANNER_IDS}")
    mask = vals["mask"]
    try:
        load_mask(mask)
    except FileNotFoundError:
        raise ConfigError(f"{where}: mask fixture not found: {mask}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: bad mask {mask!r}: {exc}") from None

    prior_vals = dict(_PRIOR_DEFAULTS)
    prior_vals.update(_section(parser, "prior"))
    return Scenario(
        name=name,
        planner=planner,
        grid=_parse_grid(vals["grid"], f"{where} grid"),
        mask=mask,
        p_tp=_convert(vals["p_tp"], float, f"{where} p_tp"),
        p_tn=_convert(vals["p_tn"], float, f"{where} p_tn"),
        trials=_convert(vals["trials"], int, f"{where} trials"),
        max_steps=_convert(vals["max_steps"], int, f"{where} max_steps"),
        tau_fraction=_convert(vals["tau_fraction"], float, f"{where} tau_fraction"),
        tau_abs=(_convert(vals["tau_abs"], float, f"{where} tau_abs")
                 if str(vals.get("tau_abs", "")).strip() else None),
        start_heading=_parse_heading(vals["start_heading"], f"{where} start_heading"),
        prior_components=(
            _convert(prior_vals["components_min"], int, f"{where} [prior] components_min"),
            _convert(prior_vals["components_max"], int, f"{where} [prior] components_max"),
        ),
        prior_variance=(
            _convert(prior_vals["variance_min"], float, f"{where} [prior] variance_min"),
            _convert(prior_vals["variance_max"], float, f"{where} [prior] variance_max"),
        ),
        planner_params=_planner_params(planner, parser, where),
    )


def resolve_scenarios(config_path: str | None, overrides: dict) -> tuple[list[Scenario], int, int | None]:
    """Apply precedence CLI flag > config file > default; returns
    (scenarios, master_seed, workers)."""
    parser = _read_config(config_path) if config_path else None
    run_vals = dict(_RUN_DEFAULTS)
    run_vals.update(_section(parser, "run"))

    seed = overrides.get("seed")
    if seed is None:
        seed = _convert(run_vals.get("seed", "0"), int, "[run] seed")
    workers = overrides.get("workers")
    if workers is None and "workers" in run_vals:
        workers = _convert(run_vals["workers"], int, "[run] workers")

    scenario_sections = (
        [s for s in parser.sections() if s.startswith("scenario:")] if parser else []
    )
    scenarios = []
    if scenario_sections:
        for sec in scenario_sections:
            name = sec.split(":", 1)[1]
            merged = dict(run_vals)
            merged.update(dict(parser[sec]))
            scenarios.append(_build_scenario(name, merged, parser, overrides, f"[{sec}]"))
    else:
        base = _build_scenario("run", run_vals, parser, overrides, "[run]")
        scenarios.append(base)
    return scenarios, seed, workers


def write_manifest(path: Path, scenarios: list[Scenario], master_seed: int,
                   workers: int | None, out_dir: Path) -> None:
    manifest = {
        "tool": "beliefsearch",
        "version": __version__,
        "master_seed": master_seed,
        "workers": workers,
        "out_dir": str(out_dir),
        "scenarios": [s.to_manifest() for s in scenarios],
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def load_manifest(path: str) -> tuple[list[Scenario], int, int | None]:
    try:
        with open(path) as fh:
            blob = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manifest {path} is not valid JSON: {exc}") from None
    scenarios = [Scenario.from_manifest(s) for s in blob["scenarios"]]
    return scenarios, blob["master_seed"], blob.get("workers")


# --- commands ---------------------------------------------------------------

def cmd_bench(args) -> int:
    if args.from_manifest:
        scenarios, seed, workers = load_manifest(args.from_manifest)
        if args.seed is not None:
            seed = args.seed
        if args.workers is not None:
            workers = args.workers
    else:
        if not args.config:
            raise ConfigError("bench needs --config or --from-manifest")
        scenarios, seed, workers = resolve_scenarios(args.config, _overrides(args))

    out_dir = Path(args.out or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(out_dir / "manifest.json", scenarios, seed, workers, out_dir)

    rows = []
    timing_rows = []
    summaries = {}
    for sc in scenarios:
        trace = str(out_dir / f"trace_{sc.name}_{{trial}}.jsonl") if args.trace else None
        records, summary = run_batch(
            sc.episode_config(seed, trace_path=trace), sc.trials, workers=workers
        )
        summaries[sc.name] = {"config": sc.to_manifest(), "results": summary}
        for r in records:
            rows.append(
                f"{sc.name},{r.trial_index},{r.planner},{int(r.found)},"
                f"{r.steps_to_find},{r.coverage_fraction!r}"
            )
            med = float(np.median(r.plan_times_us)) if r.plan_times_us else 0.0
            timing_rows.append(
                f"{sc.name},{r.trial_index},{r.decisions},{med:.3f}"
            )
        steps = summary["steps"]
        print(
            f"{sc.name}: planner={sc.planner} trials={sc.trials} "
            f"median_steps={steps['p50']:.1f} found={summary['found_rate']:.2f}"
        )

    with open(out_dir / "results.csv", "w") as fh:
        fh.write("scenario,trial_index,planner,found,steps,coverage\n")
        fh.write("\n".join(rows) + "\n")
    with open(out_dir / "timings.csv", "w") as fh:
        fh.write("scenario,trial_index,decisions,median_plan_time_us\n")
        fh.write("\n".join(timing_rows) + "\n")
    with open(out_dir / "summary.json", "w") as fh:
        json.dump({"master_seed": seed, "scenarios": summaries}, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_run(args) -> int:
    if not args.config:
        raise ConfigError("run needs --config")
    scenarios, seed, _ = resolve_scenarios(args.config, _overrides(args))
    sc = scenarios[0]
    out_dir = Path(args.out or "out")
    trace_path = None
    if args.trace:
        out_dir.mkdir(parents=True, exist_ok=True)
        trace_path = str(out_dir / f"trace_{sc.name}_0.jsonl")
    record = run_episode(sc.episode_config(seed, trace_path=trace_path))
    print(f"steps_to_find={record.steps_to_find} found={record.found} "
          f"coverage={record.coverage_fraction:.4f}")
    if trace_path:
        print(f"trace={trace_path}")
    return 0


def cmd_segment(args) -> int:
    if not args.config:
        raise ConfigError("segment needs --config")
    scenarios, seed, _ = resolve_scenarios(args.config, _overrides(args))
    sc = scenarios[0]
    out_dir = Path(args.out or "out")
    out_dir.mkdir(parents=True, exist_ok=True)

    # Same prior the harness would hand trial 0.
    prior_ss = trial_seed_streams(seed, 0)[0]
    prior_seed = int(prior_ss.generate_state(1, np.uint64)[0])
    prior = generate_prior(sc.grid, PriorConfig(sc.prior_components, sc.prior_variance, prior_seed))
    roi = segment(prior, tau=sc.tau_abs, tau_fraction=sc.tau_fraction)

    roi.to_label_csv(out_dir / "labels.csv")
    roi.to_summary_json(out_dir / "segments.json")
    _write_ppm(out_dir / "segments.ppm", prior, roi)
    print(f"regions={roi.num_regions} threshold={roi.threshold:.3e} out={out_dir}")
    return 0


def _write_ppm(path, prior, roi) -> None:
    """P6 portable pixmap: mass as grayscale, regions tinted, seeds white."""
    mass = prior.mass
    peak = mass.max() or 1.0
    gray = (mass / peak * 180.0).astype(np.uint8)
    img = np.repeat(gray[:, :, None], 3, axis=2)
    for k in range(1, roi.num_regions + 1):
        hue = (k * 0.6180339887) % 1.0
        r, g, b = colorsys.hsv_to_rgb(hue, 0.85, 1.0)
        sel = roi.labels == k
        shade = 80 + (mass[sel] / peak * 175.0)
        img[sel, 0] = (shade * r).astype(np.uint8)
        img[sel, 1] = (shade * g).astype(np.uint8)
        img[sel, 2] = (shade * b).astype(np.uint8)
    for seed in roi.seeds:
        img[seed.i - 1, seed.j - 1] = (255, 255, 255)
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(img.tobytes())


# --- argument plumbing --------------------------------------------------------

def _overrides(args) -> dict:
    return {
        "seed": args.seed,
        "trials": args.trials,
        "planner": args.planner,
        "mask": args.mask,
        "grid": args.grid,
        "max_steps": args.max_steps,
        "workers": args.workers,
    }


def _add_common(sub) -> None:
    sub.add_argument("--config", help="INI config file")
    sub.add_argument("--seed", type=int, help="master seed (overrides config)")
    sub.add_argument("--trials", type=int, help="trials per scenario")
    sub.add_argument("--planner", choices=PLANNER_IDS, help="planner id")
    sub.add_argument("--mask", help="built-in mask name or fixture path")
    sub.add_argument("--grid", help="grid as ROWSxCOLS")
    sub.add_argument("--max-steps", dest="max_steps", type=int, help="episode step cap")
    sub.add_argument("--workers", type=int, help="parallel trial workers")
    sub.add_argument("--trace", action="store_true", help="write per-decision JSONL traces")
    sub.add_argument("--out", help="output directory (default: out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beliefsearch",
        description="Grid-world target-search benchmark: tree-search planners "
                    "with region options vs receding-horizon baselines.",
    )
    parser.add_argument("--version", action="version", version=f"beliefsearch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run all configured scenarios and write reports")
    _add_common(bench)
    bench.add_argument("--from-manifest", help="re-run exactly from a manifest.json")
    bench.set_defaults(func=cmd_bench)

    run = sub.add_parser("run", help="run a single episode")
    _add_common(run)
    run.set_defaults(func=cmd_run)

    seg = sub.add_parser("segment", help="segment the trial-0 prior and dump labels")
    _add_common(seg)
    seg.set_defaults(func=cmd_segment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
