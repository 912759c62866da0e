"""Command-line interface: run, compare, and sweep subcommands.

Exit codes: 0 success, 2 usage/config error, 3 I/O failure. Output files
contain no timestamps (those go to run.log) so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import json
import re
import statistics
import sys
from pathlib import Path

from . import __version__
from .config import SimConfig, load_config, parse_config, variant_config, with_seed
from .core import ConfigError
from .sim import run_simulation, write_outputs

COMPARISON_HEADER = "variant,seed,first_death,rounds_30pct,rounds_50pct,rounds_total"
SWEEP_HEADER = "seed,first_death,rounds_30pct,rounds_50pct,rounds_total"

_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minensim",
        description="Round-based simulator for energy-efficient routing in "
                    "wireless IoT sensor networks.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (defaults used if omitted)")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--seed", type=int, help="override network.rng_seed")
    common.add_argument("--protocol", choices=("minen", "leach", "fcm"),
                        help="override the configured protocol")
    common.add_argument("--scheduler", choices=("gso", "ga", "pso", "none"),
                        help="override the configured sleep scheduler")
    common.add_argument("--force", action="store_true",
                        help="overwrite existing output files")

    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", parents=[common], help="simulate one run")
    run_p.add_argument("--trace-routes", action="store_true",
                       help="also write per-round route paths to routes.jsonl")
    run_p.set_defaults(func=cmd_run)

    cmp_p = sub.add_parser("compare", parents=[common],
                           help="run every configured variant over a seed list")
    cmp_p.add_argument("--seeds", help="inclusive seed range A..B (or one seed)")
    cmp_p.add_argument("--workers", type=int, default=1,
                       help="parallel worker processes (results are identical "
                            "for any worker count)")
    cmp_p.set_defaults(func=cmd_compare)

    swp_p = sub.add_parser("sweep", parents=[common],
                           help="run one configuration across many seeds")
    swp_p.add_argument("--seeds", help="inclusive seed range A..B (or one seed)")
    swp_p.add_argument("--workers", type=int, default=1,
                       help="parallel worker processes (results are identical "
                            "for any worker count)")
    swp_p.set_defaults(func=cmd_sweep)
    return parser


def parse_seed_range(text: str) -> list[int]:
    """'4..7' -> [4, 5, 6, 7]; '9' -> [9]."""
    text = text.strip()
    if ".." in text:
        lo_s, _, hi_s = text.partition("..")
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError as exc:
            raise ConfigError(f"bad seed range {text!r}") from exc
        if hi < lo:
            raise ConfigError(f"seed range {text!r} is empty")
        return list(range(lo, hi + 1))
    try:
        return [int(text)]
    except ValueError as exc:
        raise ConfigError(f"bad seed value {text!r}") from exc


def _load_base(args) -> SimConfig:
    cfg = load_config(args.config) if args.config else parse_config({})
    if args.seed is not None:
        cfg = with_seed(cfg, args.seed)
    return cfg


def _resolve_seeds(args, cfg: SimConfig) -> list[int]:
    if getattr(args, "seeds", None):
        return parse_seed_range(args.seeds)
    if cfg.seeds:
        return list(cfg.seeds)
    raise ConfigError("no seeds given: pass --seeds A..B or set \"seeds\" in the config")


def _ensure_fresh(out: Path, names: list[str], force: bool) -> None:
    existing = [str(out / n) for n in names if (out / n).exists()]
    if existing and not force:
        raise ConfigError(
            f"refusing to overwrite existing output(s): {', '.join(existing)} "
            "(pass --force to replace)")


def _write_runlog(out: Path, argv: list[str]) -> None:
    stamp = datetime.datetime.now().isoformat(timespec="seconds")
    with (out / "run.log").open("a", encoding="utf-8") as fh:
        fh.write(f"{stamp} minensim {__version__} :: {' '.join(argv)}\n")


def _fmt(value) -> str:
    return "" if value is None else str(value)


def _simulate_to_dir(raw_cfg: dict, seed: int | None, protocol: str | None,
                     scheduler: str | None, out_dir: str, force: bool,
                     trace: bool) -> dict:
    """Worker entry point (picklable): one run, outputs written to out_dir."""
    cfg = parse_config(raw_cfg)
    if seed is not None:
        cfg = with_seed(cfg, seed)
    summary = run_simulation(cfg, protocol=protocol, scheduler=scheduler,
                             trace_routes=trace)
    write_outputs(summary, out_dir, force=force)
    return {
        "first_death": summary.first_death_round,
        "rounds_30pct": summary.rounds_to_30pct_dead,
        "rounds_50pct": summary.rounds_to_50pct_dead,
        "rounds_total": summary.rounds_total,
    }


def _run_jobs(jobs: list[tuple], workers: int) -> list[dict]:
    """Run (key, kwargs) jobs, returning results in job order regardless of
    worker count."""
    if workers <= 1:
        return [_simulate_to_dir(**kwargs) for _, kwargs in jobs]
    results: dict[int, dict] = {}
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(_simulate_to_dir, **kwargs): idx
                   for idx, (_, kwargs) in enumerate(jobs)}
        for fut in concurrent.futures.as_completed(futures):
            results[futures[fut]] = fut.result()
    return [results[i] for i in range(len(jobs))]


def _median(values: list) -> float | int | None:
    present = [v for v in values if v is not None]
    if not present:
        return None
    return statistics.median(present)


def _quartiles(values: list) -> dict:
    present = sorted(v for v in values if v is not None)
    if not present:
        return {"q25": None, "median": None, "q75": None}
    if len(present) == 1:
        v = present[0]
        return {"q25": v, "median": v, "q75": v}
    q25, q50, q75 = statistics.quantiles(present, n=4, method="inclusive")
    return {"q25": q25, "median": q50, "q75": q75}


def cmd_run(args) -> int:
    cfg = _load_base(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = ["metrics.csv", "coverage.csv", "summary.json"]
    if args.trace_routes:
        names.append("routes.jsonl")
    _ensure_fresh(out, names, args.force)
    summary = run_simulation(cfg, protocol=args.protocol, scheduler=args.scheduler,
                             trace_routes=args.trace_routes)
    write_outputs(summary, out, force=args.force)
    _write_runlog(out, sys.argv[1:] or ["run"])
    print(f"run complete: {summary.rounds_total} rounds, "
          f"{summary.final_alive}/{summary.node_count} nodes alive")
    return 0


def _variant_name(index: int, variant: dict) -> str:
    name = variant.get("name", f"variant{index}")
    if not isinstance(name, str) or not _NAME_RE.match(name):
        raise ConfigError(f"variant name {name!r} must match {_NAME_RE.pattern}")
    return name


def cmd_compare(args) -> int:
    base = _load_base(args)
    if not base.variants or len(base.variants) < 2:
        raise ConfigError("compare requires at least 2 entries in \"variants\"")
    seeds = _resolve_seeds(args, base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _ensure_fresh(out, ["comparison.csv", "comparison_medians.csv"], args.force)

    names = []
    jobs = []
    for vi, variant in enumerate(base.variants):
        name = _variant_name(vi, variant)
        if name in names:
            raise ConfigError(f"duplicate variant name {name!r}")
        names.append(name)
        vcfg = variant_config(base, variant)  # validates the merged document
        for seed in seeds:
            jobs.append(((vi, seed), dict(
                raw_cfg=vcfg.raw, seed=seed,
                protocol=args.protocol, scheduler=args.scheduler,
                out_dir=str(out / name / f"seed_{seed}"), force=args.force,
                trace=False)))
    results = _run_jobs(jobs, args.workers)

    rows = [COMPARISON_HEADER]
    per_variant: dict[str, list[dict]] = {name: [] for name in names}
    for ((vi, seed), _), res in zip(jobs, results):
        name = names[vi]
        per_variant[name].append(res)
        rows.append(f"{name},{seed},{_fmt(res['first_death'])},"
                    f"{_fmt(res['rounds_30pct'])},{_fmt(res['rounds_50pct'])},"
                    f"{_fmt(res['rounds_total'])}")
    (out / "comparison.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    med_rows = ["variant,median_first_death,median_rounds_30pct,"
                "median_rounds_50pct,median_rounds_total"]
    for name in names:
        res = per_variant[name]
        med_rows.append(
            f"{name},{_fmt(_median([r['first_death'] for r in res]))},"
            f"{_fmt(_median([r['rounds_30pct'] for r in res]))},"
            f"{_fmt(_median([r['rounds_50pct'] for r in res]))},"
            f"{_fmt(_median([r['rounds_total'] for r in res]))}")
    (out / "comparison_medians.csv").write_text("\n".join(med_rows) + "\n",
                                                encoding="utf-8")
    _write_runlog(out, sys.argv[1:] or ["compare"])
    print(f"compared {len(names)} variants over {len(seeds)} seeds")
    return 0


def cmd_sweep(args) -> int:
    base = _load_base(args)
    seeds = _resolve_seeds(args, base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _ensure_fresh(out, ["sweep.csv", "sweep_summary.json"], args.force)

    jobs = [((seed,), dict(raw_cfg=base.raw, seed=seed,
                           protocol=args.protocol, scheduler=args.scheduler,
                           out_dir=str(out / f"seed_{seed}"), force=args.force,
                           trace=False))
            for seed in seeds]
    results = _run_jobs(jobs, args.workers)

    rows = [SWEEP_HEADER]
    for ((seed,), _), res in zip(jobs, results):
        rows.append(f"{seed},{_fmt(res['first_death'])},{_fmt(res['rounds_30pct'])},"
                    f"{_fmt(res['rounds_50pct'])},{_fmt(res['rounds_total'])}")
    (out / "sweep.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    agg = {"seeds": len(seeds)}
    for key in ("first_death", "rounds_30pct", "rounds_50pct", "rounds_total"):
        agg[key] = _quartiles([r[key] for r in results])
    (out / "sweep_summary.json").write_text(json.dumps(agg, indent=2) + "\n",
                                            encoding="utf-8")
    _write_runlog(out, sys.argv[1:] or ["sweep"])
    print(f"swept {len(seeds)} seeds")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
