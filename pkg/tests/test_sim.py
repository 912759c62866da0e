"""Whole-run simulation behavior and output files."""

import json

import numpy as np
import pytest

from minensim.config import parse_config, with_seed
from minensim.core import ConfigError, RoundMetrics
from minensim.sim import (METRICS_HEADER, percent_dead_round, run_simulation,
                          output_files, write_outputs)


def _small(**extra):
    """40 nodes: two clusters per round, so clustering runs every round."""
    doc = {"network": {"node_count": 40, "area_width": 100.0,
                       "area_height": 100.0, "initial_energy": 0.02,
                       "sensing_radius": 20.0, "coverage_grid_cells": 8,
                       "rng_seed": 4},
           "round_cap": 2000}
    doc.update(extra)
    return parse_config(doc)


def _rm(round_no, alive):
    return RoundMetrics(round=round_no, alive=alive, awake=alive,
                        total_energy=1.0, heads=1, path_cost_total=0.0,
                        energy_spent=0.0)


# ------------------------------------------------------------- milestones

def test_percent_dead_round_thresholds():
    metrics = [_rm(1, 10), _rm(2, 9), _rm(3, 7), _rm(4, 6), _rm(5, 4)]
    assert percent_dead_round(metrics, 0.1, 10) == 2
    assert percent_dead_round(metrics, 0.3, 10) == 3
    assert percent_dead_round(metrics, 0.5, 10) == 5
    assert percent_dead_round(metrics, 0.8, 10) is None
    assert percent_dead_round(metrics, 1.0, 10) is None


def test_percent_dead_round_exact_fraction_counts():
    """The threshold is >=, so hitting the fraction exactly qualifies."""
    metrics = [_rm(1, 7)]
    assert percent_dead_round(metrics, 0.3, 10) == 1


def test_percent_dead_round_rejects_bad_arguments():
    with pytest.raises(ValueError):
        percent_dead_round([], 0.0, 10)
    with pytest.raises(ValueError):
        percent_dead_round([], 1.5, 10)
    with pytest.raises(ValueError):
        percent_dead_round([], 0.5, 0)


# ------------------------------------------------------------- basic runs

def test_single_node_network_dies_in_round_one():
    """One node with less charge than a single BS transmission costs."""
    cfg = parse_config({"network": {"node_count": 1, "initial_energy": 1e-4,
                                    "rng_seed": 1}})
    s = run_simulation(cfg)
    assert s.rounds_total == 1
    assert s.first_death_round == 1
    assert s.rounds_to_30pct_dead == 1
    assert s.rounds_to_50pct_dead == 1
    assert s.final_alive == 0
    assert s.final_total_energy == 0.0


def test_run_to_depletion_milestones_ordered():
    s = run_simulation(_small())
    assert s.final_alive == 0
    assert s.first_death_round is not None
    assert (s.first_death_round <= s.rounds_to_30pct_dead
            <= s.rounds_to_50pct_dead <= s.rounds_total)
    assert s.metrics[-1].alive == 0


def test_metrics_round_numbers_are_one_based_and_dense():
    s = run_simulation(_small())
    assert [rm.round for rm in s.metrics] == list(range(1, s.rounds_total + 1))


def test_total_energy_strictly_decreases_while_active():
    s = run_simulation(_small())
    energies = [rm.total_energy for rm in s.metrics]
    assert all(b < a for a, b in zip(energies, energies[1:]))
    assert all(e >= 0.0 for e in energies)


def test_alive_counts_never_increase():
    s = run_simulation(_small())
    alive = [rm.alive for rm in s.metrics]
    assert all(b <= a for a, b in zip(alive, alive[1:]))


def test_awake_equals_alive_at_round_start_without_scheduler():
    s = run_simulation(_small())
    prev_alive = s.node_count
    for rm in s.metrics:
        assert rm.awake == prev_alive
        prev_alive = rm.alive


def test_per_round_conservation():
    """Energy drop per round must equal the spend ledger."""
    s = run_simulation(_small())
    prev = s.node_count * 0.02
    for rm in s.metrics:
        drop = prev - rm.total_energy
        assert drop == pytest.approx(rm.energy_spent, rel=1e-9, abs=1e-15)
        prev = rm.total_energy


def test_round_cap_stops_the_run():
    cfg = _small(round_cap=25)
    s = run_simulation(cfg)
    assert s.rounds_total == 25
    assert s.final_alive > 0


def test_runs_are_reproducible():
    a = run_simulation(_small())
    b = run_simulation(_small())
    assert a.metrics == b.metrics
    assert (a.coverage_grid == b.coverage_grid).all()


def test_seed_changes_the_run():
    a = run_simulation(_small())
    b = run_simulation(with_seed(_small(), 5))
    assert a.metrics != b.metrics


def test_minen_head_count_bounded_by_cluster_rule():
    cfg = _small()
    s = run_simulation(cfg)
    for rm in s.metrics:
        if rm.alive == 0:
            continue
        assert 1 <= rm.heads <= max(1, cfg.network.cluster_count_for(rm.awake))


def test_single_cluster_fast_path_skips_clustering_rng():
    """With k = 1 the clustering stage is skipped entirely, so the choice of
    clustering algorithm cannot change the run."""
    base = {"network": {"node_count": 12, "initial_energy": 0.02,
                        "cluster_count": 1, "rng_seed": 2},
            "round_cap": 500}
    a = run_simulation(parse_config({**base, "clustering": "kmeans"}))
    b = run_simulation(parse_config({**base, "clustering": "gmm"}))
    assert a.metrics == b.metrics


def test_kmeans_and_gmm_runs_differ_in_general():
    a = run_simulation(_small(clustering="kmeans"))
    b = run_simulation(_small(clustering="gmm"))
    assert a.metrics != b.metrics


def test_protocol_override_matches_configured_protocol():
    cfg_minen = _small()
    cfg_leach = _small(protocol="leach")
    via_override = run_simulation(cfg_minen, protocol="leach")
    via_config = run_simulation(cfg_leach)
    assert via_override.metrics == via_config.metrics


def test_unknown_protocol_override_rejected():
    with pytest.raises(ConfigError):
        run_simulation(_small(), protocol="flooding")


def test_leach_and_fcm_protocols_run_to_depletion():
    for protocol in ("leach", "fcm"):
        s = run_simulation(_small(protocol=protocol))
        assert s.final_alive == 0
        assert s.rounds_total == len(s.metrics)


def test_scheduler_override_applies():
    cfg = _small(scheduler={"algorithm": "none", "max_iterations": 5,
                            "population_size": 6,
                            "coverage_preserving": True, "beta": 0.4})
    s = run_simulation(cfg, scheduler="gso")
    start_alive = [s.node_count] + [rm.alive for rm in s.metrics[:-1]]
    assert any(rm.awake < start for rm, start in zip(s.metrics, start_alive))


def test_coverage_grid_full_radius_counts_every_round():
    """A sensing radius larger than the whole area makes every cell covered
    in every round that has at least one awake node."""
    cfg = _small(network={"node_count": 10, "area_width": 50.0,
                          "area_height": 50.0, "initial_energy": 0.02,
                          "sensing_radius": 500.0, "coverage_grid_cells": 6,
                          "rng_seed": 3})
    s = run_simulation(cfg)
    assert (s.coverage_grid == s.rounds_total).all()


def test_coverage_grid_bounded_by_rounds():
    s = run_simulation(_small())
    assert s.coverage_grid.min() >= 0
    assert s.coverage_grid.max() <= s.rounds_total


def test_route_trace_records_minen_paths():
    s = run_simulation(_small(round_cap=5), trace_routes=True)
    assert s.route_trace is not None
    assert len(s.route_trace) == 5
    for rec, rm in zip(s.route_trace, s.metrics):
        assert rec["round"] == rm.round
        assert len(rec["paths"]) == rm.heads
        for head, path in rec["paths"].items():
            assert int(head) == path[0]
            assert path[-1] == -1


def test_route_trace_off_by_default():
    assert run_simulation(_small(round_cap=2)).route_trace is None


# ------------------------------------------------------------- outputs

def test_write_outputs_files_and_shapes(tmp_path):
    s = run_simulation(_small(round_cap=12), trace_routes=True)
    write_outputs(s, tmp_path)
    metrics = (tmp_path / "metrics.csv").read_text().splitlines()
    assert metrics[0] == METRICS_HEADER
    assert len(metrics) == 13
    first = metrics[1].split(",")
    assert first[0] == "1"
    assert float(first[3]) == s.metrics[0].total_energy  # repr round-trips

    coverage = (tmp_path / "coverage.csv").read_text().splitlines()
    g = s.coverage_grid.shape[0]
    assert coverage[0] == ",".join(f"c{j}" for j in range(g))
    assert len(coverage) == g + 1

    doc = json.loads((tmp_path / "summary.json").read_text())
    assert list(doc) == ["rounds_total", "first_death_round",
                         "rounds_to_30pct_dead", "rounds_to_50pct_dead",
                         "node_count", "final_alive", "final_total_energy_j"]
    assert doc["rounds_total"] == 12
    assert doc["node_count"] == 40

    trace_lines = (tmp_path / "routes.jsonl").read_text().splitlines()
    assert len(trace_lines) == 12
    assert json.loads(trace_lines[0])["round"] == 1


def test_write_outputs_refuses_overwrite(tmp_path):
    s = run_simulation(_small(round_cap=3))
    write_outputs(s, tmp_path)
    with pytest.raises(ConfigError, match="--force"):
        write_outputs(s, tmp_path)
    write_outputs(s, tmp_path, force=True)


def test_write_outputs_bytes_are_reproducible(tmp_path):
    s1 = run_simulation(_small(round_cap=20), trace_routes=True)
    s2 = run_simulation(_small(round_cap=20), trace_routes=True)
    write_outputs(s1, tmp_path / "a")
    write_outputs(s2, tmp_path / "b")
    for name in output_files(True):
        assert (tmp_path / "a" / name).read_bytes() == \
               (tmp_path / "b" / name).read_bytes()


def test_output_files_listing():
    assert output_files(False) == ["metrics.csv", "coverage.csv", "summary.json"]
    assert output_files(True)[-1] == "routes.jsonl"
