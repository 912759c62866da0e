"""Acceptance gate: nine end-to-end checks over the whole package.

Each test prints one PASS/FAIL line straight to the terminal (bypassing
pytest's capture) so the gate's verdict is readable even in long runs.
The two study fixtures simulate full networks at realistic scale, so this
file takes tens of minutes; the rest of the suite stays fast.
"""

import statistics
import sys
import time

import numpy as np
import pytest

from conftest import make_node
from minensim.baselines import fcm_cluster
from minensim.clustering import gmm_fit, kmeans
from minensim.config import parse_config, with_seed
from minensim.core import RngStream
from minensim.energy import EdgeCost, EnergyParams, edge_cost, rx_energy, tx_energy
from minensim.routing import BS_VERTEX, GraphEdge, HeadGraph, dijkstra
from minensim.sim import run_simulation, write_outputs
from minensim.sleepsched import CoverageContext, SchedulerConfig, fitness

PROTOCOLS = ("minen", "fcm", "leach")
SCHEDULERS = ("gso", "ga", "pso")
STUDY_SEEDS = list(range(1, 12))

# Shared-fixture sizing: the scheduler comparison needs networks small
# enough to deplete in minutes yet large enough that coverage/energy
# trade-offs differ between algorithms. beta > alpha keeps "everyone
# sleeps" from outscoring every schedule that preserves coverage.
SCHEDULER_STUDY_DOC = {
    "protocol": "minen",
    "network": {
        "node_count": 100,
        "area_width": 150.0,
        "area_height": 150.0,
        "initial_energy": 0.35,
        "sensing_radius": 30.0,
        "coverage_grid_cells": 15,
    },
    "scheduler": {
        "alpha": 0.3,
        "beta": 0.4,
        "max_iterations": 50,
        "coverage_preserving": True,
    },
    "round_cap": 20000,
}


def _report(line: str) -> None:
    print(line, file=sys.__stdout__, flush=True)


def _verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _median(values) -> float:
    return statistics.median(float("inf") if v is None else float(v)
                             for v in values)


@pytest.fixture(scope="session")
def lifetime_study():
    """All three protocols at default parameters, seeds 1..11 each."""
    base = parse_config({})
    runs = {}
    t0 = time.perf_counter()
    for proto in PROTOCOLS:
        runs[proto] = []
        for seed in STUDY_SEEDS:
            summary = run_simulation(with_seed(base, seed), protocol=proto)
            _report(f"    lifetime study {proto} seed {seed}: "
                    f"r30={summary.rounds_to_30pct_dead} "
                    f"r50={summary.rounds_to_50pct_dead} "
                    f"total={summary.rounds_total}")
            runs[proto].append(summary)
    runs["elapsed_s"] = time.perf_counter() - t0
    runs["config"] = base
    return runs


@pytest.fixture(scope="session")
def scheduler_study():
    """One protocol, three sleep schedulers, seeds 1..11 each."""
    base = parse_config(dict(SCHEDULER_STUDY_DOC))
    runs = {}
    t0 = time.perf_counter()
    for alg in SCHEDULERS:
        runs[alg] = []
        for seed in STUDY_SEEDS:
            summary = run_simulation(with_seed(base, seed), scheduler=alg)
            _report(f"    scheduler study {alg} seed {seed}: "
                    f"total={summary.rounds_total}")
            runs[alg].append(summary)
    runs["elapsed_s"] = time.perf_counter() - t0
    return runs


def test_criterion_1_radio_energy_anchors():
    """Hand-computed radio costs, the d0 crossover, and branch continuity."""
    t0 = time.perf_counter()
    p = EnergyParams()
    anchors = [
        ("tx d=50 l=2000", tx_energy(p, 50.0, 2000.0), 1.5e-4),
        ("tx d=100 l=1000", tx_energy(p, 100.0, 1000.0), 1.8e-4),
        ("rx l=4000", rx_energy(p, 4000.0), 2.0e-4),
        ("d0", p.d0, 87.70580193070292),
    ]
    bad = [name for name, got, want in anchors
           if abs(got - want) > 1e-12 * abs(want)]

    below = tx_energy(p, np.nextafter(p.d0, 0.0), 1000.0)
    above = tx_energy(p, np.nextafter(p.d0, np.inf), 1000.0)
    at = tx_energy(p, p.d0, 1000.0)
    jump = max(abs(below - above), abs(below - at)) / at
    continuous = jump <= 1e-9

    elapsed = time.perf_counter() - t0
    ok = not bad and continuous and elapsed < 1.0
    _report(f"criterion 1: {_verdict(ok)} radio anchors "
            f"(branch jump {jump:.2e}, {elapsed:.3f}s)")
    assert not bad, f"anchor mismatch: {bad}"
    assert continuous, f"amplifier branches disagree at d0 by {jump:.2e}"
    assert elapsed < 1.0


def _best_route_by_enumeration(graph: HeadGraph, source: int):
    """Cheapest simple path to the base station by trying every one.

    Candidates order by (cost, hops, vertex sequence) exactly like the
    router's heap entries, with costs accumulated left to right.
    """
    edges = graph.edges
    best = None

    def walk(u, cost, path, seen):
        nonlocal best
        for v, e in edges[u].items():
            if v == BS_VERTEX:
                cand = (cost + e.cost.value, len(path), tuple(path) + (BS_VERTEX,))
                if best is None or cand < best:
                    best = cand
            elif v not in seen:
                seen.add(v)
                path.append(v)
                walk(v, cost + e.cost.value, path, seen)
                path.pop()
                seen.remove(v)

    walk(source, 0.0, [source], {source})
    return best


def test_criterion_2_router_matches_exhaustive_search():
    """500 random complete head graphs: the router's path and cost must
    equal a brute-force enumeration of every simple path, exactly."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260814)
    for trial in range(500):
        k = int(rng.integers(2, 9))
        heads = sorted(int(v) for v in rng.choice(50, size=k, replace=False))
        quantized = trial % 2 == 0

        def draw():
            if quantized:
                # multiples of 0.25 are exact in binary and force cost ties
                return float(rng.integers(0, 9)) * 0.25
            return float(rng.random()) * 10.0

        edges = {}
        for u in heads:
            out = {}
            for v in heads:
                if v != u:
                    out[v] = GraphEdge(EdgeCost(draw(), 0.0, 0.0, 0.0), 1.0)
            out[BS_VERTEX] = GraphEdge(EdgeCost(draw(), 0.0, 0.0, 0.0), 1.0)
            edges[u] = out
        graph = HeadGraph(head_ids=heads, edges=edges)
        source = int(heads[rng.integers(0, k)])

        want_cost, _, want_path = _best_route_by_enumeration(graph, source)
        path, cost = dijkstra(graph, source)
        assert cost == want_cost, (
            f"trial {trial}: router cost {cost!r} != enumerated {want_cost!r}")
        assert tuple(path) == want_path, (
            f"trial {trial}: router path {path} != enumerated {list(want_path)}")
    elapsed = time.perf_counter() - t0
    ok = elapsed < 30.0
    _report(f"criterion 2: {_verdict(ok)} router == exhaustive search "
            f"on 500 graphs ({elapsed:.1f}s)")
    assert elapsed < 30.0


def test_criterion_3_worked_route_example():
    """A two-link choice computed by hand: costs 11 J and 10 J exactly,
    and the router takes the 10 J link."""
    p = EnergyParams(e_elec=0.5, eps_fs=0.25, eps_mp=2.0 ** -10)
    assert p.d0 == 16.0

    drained = [make_node(0, 0.0, 0.0, energy=0.5, initial_energy=5.0),
               make_node(1, 2.0, 0.0, energy=0.5, initial_energy=5.0)]
    fresh = [make_node(2, 10.0, 0.0, energy=5.0, initial_energy=5.0),
             make_node(3, 16.0, 0.0, energy=5.0, initial_energy=5.0)]
    # d=2 stays free-space: tx 1.5, rx 0.5, penalty 4.5 + 4.5
    short_link = edge_cost(p, drained[0], drained[1], 1.0)
    # d=6 free-space: tx 9.5, rx 0.5, no penalty on full batteries
    long_link = edge_cost(p, fresh[0], fresh[1], 1.0)
    exact = short_link.value == 11.0 and long_link.value == 10.0

    zero = EdgeCost(0.0, 0.0, 0.0, 0.0)
    big = EdgeCost(25.0, 0.0, 0.0, 0.0)
    graph = HeadGraph(head_ids=[0, 1, 2], edges={
        0: {1: GraphEdge(short_link, 1.0), 2: GraphEdge(long_link, 1.0),
            BS_VERTEX: GraphEdge(big, 1.0)},
        1: {0: GraphEdge(short_link, 1.0), 2: GraphEdge(zero, 1.0),
            BS_VERTEX: GraphEdge(zero, 1.0)},
        2: {0: GraphEdge(long_link, 1.0), 1: GraphEdge(zero, 1.0),
            BS_VERTEX: GraphEdge(zero, 1.0)},
    })
    path, cost = dijkstra(graph, 0)

    ok = exact and path == [0, 2, BS_VERTEX] and cost == 10.0
    _report(f"criterion 3: {_verdict(ok)} worked example "
            f"(links {short_link.value!r} J / {long_link.value!r} J, "
            f"route cost {cost!r})")
    assert short_link.value == 11.0
    assert long_link.value == 10.0
    assert path == [0, 2, BS_VERTEX]
    assert cost == 10.0


def test_criterion_4_clustering_objectives_are_monotone():
    """100 random 3-feature datasets: k-means inertia never rises, the
    mixture log-likelihood never falls (1e-9 slack), the fuzzy objective
    never rises."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    worst_gmm_dip = 0.0
    for trial in range(100):
        n = int(rng.integers(20, 121))
        kind = trial % 3
        if kind == 0:
            pts = rng.normal(0.0, rng.uniform(0.5, 20.0), size=(n, 3))
        elif kind == 1:
            centers = rng.normal(0.0, 8.0, size=(4, 3))
            pts = centers[rng.integers(0, 4, n)] + rng.normal(0.0, 1.0, (n, 3))
        else:
            pts = rng.uniform(-5.0, 5.0, size=(n, 3)) * np.array([1.0, 12.0, 90.0])
        k = int(rng.integers(1, 7))
        seed = int(rng.integers(0, 2 ** 31))

        km = kmeans(pts, k, RngStream(seed))
        for a, b in zip(km.inertia_history, km.inertia_history[1:]):
            assert b <= a, f"trial {trial}: inertia rose {a!r} -> {b!r}"

        gm = gmm_fit(pts, k, RngStream(seed))
        for a, b in zip(gm.loglik_history, gm.loglik_history[1:]):
            assert b >= a - 1e-9, f"trial {trial}: log-lik fell {a!r} -> {b!r}"
            worst_gmm_dip = max(worst_gmm_dip, a - b)

        fc = fcm_cluster(pts, k, rng=RngStream(seed))
        for a, b in zip(fc.objective_history, fc.objective_history[1:]):
            assert b <= a, f"trial {trial}: fuzzy objective rose {a!r} -> {b!r}"
    elapsed = time.perf_counter() - t0
    ok = elapsed < 60.0
    _report(f"criterion 4: {_verdict(ok)} objective monotonicity on 100 "
            f"datasets (worst log-lik dip {worst_gmm_dip:.2e}, {elapsed:.1f}s)")
    assert elapsed < 60.0


def test_criterion_5_fitness_bounds_and_anchors():
    """Schedule fitness stays in [0, alpha+beta] over 10,000 random
    schedules; all-awake scores exactly 0 and all-asleep exactly 0.67."""
    assert 0.34 + 0.33 == 0.67  # the default weight sum is exact in doubles

    rng = np.random.default_rng(7)
    n = 40
    xs = rng.uniform(0.0, 100.0, n)
    ys = rng.uniform(0.0, 100.0, n)
    energies = rng.uniform(0.05, 2.0, n)
    nodes = [make_node(i, xs[i], ys[i], energy=float(energies[i]))
             for i in range(n)]
    ctx = CoverageContext(np.stack([xs, ys], axis=1), 100.0, 100.0, 10, 18.0)
    cfg = SchedulerConfig()
    bound = cfg.alpha + cfg.beta

    awake_all = fitness(np.zeros(n, dtype=bool), nodes, ctx, cfg)
    asleep_all = fitness(np.ones(n, dtype=bool), nodes, ctx, cfg)

    low = np.inf
    high = -np.inf
    for _ in range(10_000):
        mask = rng.random(n) < rng.random()
        f = fitness(mask, nodes, ctx, cfg)
        low = min(low, f)
        high = max(high, f)
        assert 0.0 <= f <= bound, f"fitness {f!r} outside [0, {bound!r}]"

    ok = awake_all == 0.0 and asleep_all == 0.67
    _report(f"criterion 5: {_verdict(ok)} fitness bounds "
            f"(range seen [{low:.4f}, {high:.4f}], awake={awake_all!r}, "
            f"asleep={asleep_all!r})")
    assert awake_all == 0.0
    assert asleep_all == 0.67


def test_criterion_6_protocol_lifetime_ordering(lifetime_study):
    """Median lifetimes at default parameters must order the protocols:
    minen >= fcm > leach on 30%-dead rounds, minen > fcm > leach on
    50%-dead rounds."""
    r30 = {p: _median(s.rounds_to_30pct_dead for s in lifetime_study[p])
           for p in PROTOCOLS}
    r50 = {p: _median(s.rounds_to_50pct_dead for s in lifetime_study[p])
           for p in PROTOCOLS}
    clauses = {
        "r30 minen>=fcm": r30["minen"] >= r30["fcm"],
        "r30 fcm>leach": r30["fcm"] > r30["leach"],
        "r50 minen>fcm": r50["minen"] > r50["fcm"],
        "r50 fcm>leach": r50["fcm"] > r50["leach"],
    }
    failed = [name for name, good in clauses.items() if not good]
    ok = not failed
    _report(f"criterion 6: {_verdict(ok)} protocol lifetime ordering "
            f"(r30 medians minen={r30['minen']:.0f} fcm={r30['fcm']:.0f} "
            f"leach={r30['leach']:.0f}; r50 medians minen={r50['minen']:.0f} "
            f"fcm={r50['fcm']:.0f} leach={r50['leach']:.0f}; "
            f"{lifetime_study['elapsed_s']:.0f}s)")
    assert ok, f"ordering clauses failed: {', '.join(failed)}"


def test_criterion_7_scheduler_lifetime_ordering(scheduler_study):
    """With clustering and routing fixed, the glowworm scheduler's median
    total lifetime must not trail the genetic or particle-swarm ones."""
    med = {alg: _median(s.rounds_total for s in scheduler_study[alg])
           for alg in SCHEDULERS}
    clauses = {
        "gso>=ga": med["gso"] >= med["ga"],
        "gso>=pso": med["gso"] >= med["pso"],
    }
    failed = [name for name, good in clauses.items() if not good]
    ok = not failed
    _report(f"criterion 7: {_verdict(ok)} scheduler lifetime ordering "
            f"(median rounds gso={med['gso']:.0f} ga={med['ga']:.0f} "
            f"pso={med['pso']:.0f}; {scheduler_study['elapsed_s']:.0f}s)")
    assert ok, f"ordering clauses failed: {', '.join(failed)}"


def test_criterion_8_energy_conservation(lifetime_study):
    """Every round of every lifetime-study run: the drop in network energy
    equals the round's summed deductions to 1e-9 relative, and no node's
    energy ever goes negative."""
    net = lifetime_study["config"].network
    start_total = net.node_count * net.initial_energy
    worst = 0.0
    rounds_checked = 0
    for proto in PROTOCOLS:
        for summary in lifetime_study[proto]:
            assert summary.min_node_energy >= 0.0, (
                f"{proto}: a node went to {summary.min_node_energy!r} J")
            prev = start_total
            for rm in summary.metrics:
                assert rm.total_energy >= 0.0
                drop = prev - rm.total_energy
                err = abs(drop - rm.energy_spent)
                scale = max(abs(drop), abs(rm.energy_spent))
                assert err <= 1e-9 * scale or err == 0.0, (
                    f"{proto} round {rm.round}: drop {drop!r} != "
                    f"spent {rm.energy_spent!r}")
                if scale > 0.0:
                    worst = max(worst, err / scale)
                prev = rm.total_energy
                rounds_checked += 1
    _report(f"criterion 8: PASS energy conservation over {rounds_checked} "
            f"rounds (worst relative error {worst:.2e})")


def test_criterion_9_reruns_are_byte_identical(tmp_path):
    """The same config simulated twice writes byte-identical outputs."""
    doc = {
        "protocol": "minen",
        "network": {
            "node_count": 36,
            "area_width": 90.0,
            "area_height": 90.0,
            "initial_energy": 0.08,
            "sensing_radius": 22.0,
            "coverage_grid_cells": 9,
            "rng_seed": 7,
        },
        "scheduler": {
            "algorithm": "gso",
            "alpha": 0.3,
            "beta": 0.4,
            "max_iterations": 15,
            "population_size": 12,
            "coverage_preserving": True,
        },
        "round_cap": 1500,
    }
    dirs = []
    for name in ("first", "second"):
        out = tmp_path / name
        write_outputs(run_simulation(parse_config(dict(doc))), out)
        dirs.append(out)

    mismatched = []
    for fname in ("metrics.csv", "coverage.csv", "summary.json"):
        if (dirs[0] / fname).read_bytes() != (dirs[1] / fname).read_bytes():
            mismatched.append(fname)
    ok = not mismatched
    _report(f"criterion 9: {_verdict(ok)} byte-identical rerun outputs")
    assert not mismatched, f"outputs differ: {', '.join(mismatched)}"
