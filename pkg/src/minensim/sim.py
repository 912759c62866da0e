"""Round-based simulation loop, lifetime metrics, and output files."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .baselines import LeachState, fcm_round, leach_round
from .clustering import ClusterAssignment, elect_heads, extract_features, gmm_fit, kmeans
from .config import SimConfig
from .core import ConfigError, NodeState, RngStream, RoundMetrics, build_network
from .routing import build_head_graph, execute_round, idle_round_metrics, plan_routes
from .sleepsched import SCHEDULERS, CoverageContext

METRICS_HEADER = "round,alive,awake,total_energy_j,heads"


@dataclass
class RunSummary:
    """Whole-run outcome: lifetime milestones, the accumulated coverage grid,
    and the full per-round metrics series. min_node_energy is the lowest
    single-node energy seen at any round end; deductions never overdraw a
    node, so it stays non-negative."""

    rounds_total: int
    first_death_round: int | None
    rounds_to_30pct_dead: int | None
    rounds_to_50pct_dead: int | None
    node_count: int
    final_alive: int
    final_total_energy: float
    coverage_grid: np.ndarray
    metrics: list[RoundMetrics]
    min_node_energy: float = 0.0
    route_trace: list[dict] | None = None


def percent_dead_round(metrics: list[RoundMetrics], fraction: float,
                       initial_count: int) -> int | None:
    """First round at which dead/initial >= fraction, or None if never."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    if initial_count < 1:
        raise ValueError("initial_count must be >= 1")
    for rm in metrics:
        if (initial_count - rm.alive) / initial_count >= fraction:
            return rm.round
    return None


def _minen_round(cfg: SimConfig, nodes, alive, participants, bs, rng,
                 trace: list | None, round_no: int) -> RoundMetrics:
    k = cfg.network.cluster_count_for(len(alive))
    k = min(k, len(participants))
    if k == 1:
        labels = np.zeros(len(participants), dtype=int)
    else:
        feats = extract_features(participants, bs)
        opts = cfg.clustering_opts
        if cfg.clustering == "kmeans":
            labels = kmeans(feats, k, rng, max_iter=opts.kmeans_max_iter).labels
        else:
            labels = gmm_fit(feats, k, rng, max_iter=opts.gmm_max_iter,
                             tol=opts.gmm_tol, reg=opts.gmm_reg).labels
    heads_map = elect_heads(participants, labels, rng)
    assignment = ClusterAssignment(
        labels={n.id: int(lab) for n, lab in zip(participants, labels)},
        heads=heads_map, method=cfg.clustering)
    graph = build_head_graph(heads_map.values(), nodes, bs, cfg.energy,
                             cfg.aggregated_len_bits)
    plan = plan_routes(graph)
    if trace is not None:
        trace.append({"round": round_no,
                      "paths": {str(h): list(p) for h, p in sorted(plan.paths.items())}})
    return execute_round(nodes, assignment, plan, cfg.energy, bs,
                         cfg.aggregated_len_bits)


def run_simulation(cfg: SimConfig, protocol: str | None = None,
                   scheduler: str | None = None,
                   trace_routes: bool = False) -> RunSummary:
    """Simulate one network from construction to depletion (or the round cap).

    Each round: optional sleep scheduling over the alive nodes, coverage
    accounting for the awake set, protocol-specific clustering/routing and
    energy deduction, then every survivor wakes up. protocol and scheduler
    override the config when given. Pure function of (config, overrides):
    the same inputs reproduce the run bit for bit.
    """
    cfg.validate()
    protocol = protocol if protocol is not None else cfg.protocol
    if protocol not in ("minen", "leach", "fcm"):
        raise ConfigError(f"unknown protocol {protocol!r}")
    sched_cfg = cfg.scheduler
    if scheduler is not None:
        sched_cfg = replace(sched_cfg, algorithm=scheduler)
        sched_cfg.validate()
    schedule_fn = SCHEDULERS.get(sched_cfg.algorithm)

    net = cfg.network
    rng = RngStream(net.rng_seed)
    nodes = build_network(net, rng)
    bs = net.resolved_bs()
    positions = np.array([[n.pos.x, n.pos.y] for n in nodes])
    ctx = CoverageContext(positions, net.area_width, net.area_height,
                          net.coverage_grid_cells, net.sensing_radius)
    grid = np.zeros((net.coverage_grid_cells, net.coverage_grid_cells), dtype=np.int64)
    leach_state = LeachState()
    metrics: list[RoundMetrics] = []
    trace: list[dict] | None = [] if trace_routes else None
    min_node_energy = min(n.energy for n in nodes)

    round_no = 0
    while round_no < cfg.round_cap:
        alive = [n for n in nodes if n.alive]
        if not alive:
            break
        round_no += 1
        if schedule_fn is not None:
            solution = schedule_fn(alive, ctx, sched_cfg, rng)
            for node, asleep in zip(alive, solution.asleep):
                node.awake = not bool(asleep)
        participants = [n for n in alive if n.awake]
        grid += ctx.covered_mask([n.id for n in participants])
        if not participants:
            rm = idle_round_metrics(nodes)
        elif protocol == "minen":
            rm = _minen_round(cfg, nodes, alive, participants, bs, rng,
                              trace, round_no)
        elif protocol == "leach":
            rm = leach_round(nodes, cfg.leach, cfg.energy, bs, rng,
                             leach_state, cfg.aggregated_len_bits)
        else:
            rm = fcm_round(nodes, cfg.fcm, cfg.energy, bs, rng,
                           default_c=net.cluster_count_for(len(alive)),
                           agg_len=cfg.aggregated_len_bits)
        rm.round = round_no
        metrics.append(rm)
        round_min = min(n.energy for n in nodes)
        if round_min < min_node_energy:
            min_node_energy = round_min
        for n in nodes:
            n.awake = n.alive  # survivors wake; the dead stay silent

    if metrics:
        final_alive = metrics[-1].alive
        final_total = metrics[-1].total_energy
    else:
        final_alive = net.node_count
        final_total = float(net.node_count) * net.initial_energy
    first_death = next((rm.round for rm in metrics if rm.alive < net.node_count), None)
    return RunSummary(
        rounds_total=round_no,
        first_death_round=first_death,
        rounds_to_30pct_dead=percent_dead_round(metrics, 0.3, net.node_count),
        rounds_to_50pct_dead=percent_dead_round(metrics, 0.5, net.node_count),
        node_count=net.node_count,
        final_alive=final_alive,
        final_total_energy=final_total,
        coverage_grid=grid,
        metrics=metrics,
        min_node_energy=min_node_energy,
        route_trace=trace,
    )


def output_files(summary_has_trace: bool) -> list[str]:
    names = ["metrics.csv", "coverage.csv", "summary.json"]
    if summary_has_trace:
        names.append("routes.jsonl")
    return names


def write_outputs(summary: RunSummary, out_dir, force: bool = False) -> None:
    """Write metrics.csv, coverage.csv, summary.json (and routes.jsonl when a
    trace was recorded) into out_dir.

    Floats are written in full double precision (shortest round-tripping
    form); files are UTF-8 with LF line endings and no timestamps, so a rerun
    of the same config produces byte-identical files. Existing outputs are
    only replaced when force is set.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    targets = [out / name for name in output_files(summary.route_trace is not None)]
    existing = [str(t) for t in targets if t.exists()]
    if existing and not force:
        raise ConfigError(
            f"refusing to overwrite existing output(s): {', '.join(existing)} "
            "(pass --force to replace)")

    lines = [METRICS_HEADER]
    for rm in summary.metrics:
        lines.append(f"{rm.round},{rm.alive},{rm.awake},{rm.total_energy!r},{rm.heads}")
    (out / "metrics.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    g = summary.coverage_grid.shape[0]
    cov_lines = [",".join(f"c{j}" for j in range(g))]
    for row in summary.coverage_grid:
        cov_lines.append(",".join(str(int(v)) for v in row))
    (out / "coverage.csv").write_text("\n".join(cov_lines) + "\n", encoding="utf-8")

    doc = {
        "rounds_total": summary.rounds_total,
        "first_death_round": summary.first_death_round,
        "rounds_to_30pct_dead": summary.rounds_to_30pct_dead,
        "rounds_to_50pct_dead": summary.rounds_to_50pct_dead,
        "node_count": summary.node_count,
        "final_alive": summary.final_alive,
        "final_total_energy_j": summary.final_total_energy,
    }
    (out / "summary.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    if summary.route_trace is not None:
        trace_lines = [json.dumps(rec) for rec in summary.route_trace]
        (out / "routes.jsonl").write_text("\n".join(trace_lines) + ("\n" if trace_lines else ""),
                                          encoding="utf-8")
