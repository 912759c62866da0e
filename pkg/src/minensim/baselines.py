"""LEACH and fuzzy-c-means baseline protocols.

Both baselines send every head's aggregated message straight to the base
station and account energy through the same round executor as the main
protocol, so death/clamp semantics and the spend ledger are identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .clustering import ClusterAssignment, elect_heads
from .core import ConfigError, NodeState, Position, RngStream, RoundMetrics, distance
from .energy import EnergyParams, bs_edge_cost
from .routing import (BS_VERTEX, DEFAULT_AGG_LEN, RoutePlan, execute_round,
                      idle_round_metrics)


@dataclass
class LeachConfig:
    p: float = 0.05  # desired head fraction per round

    def validate(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ConfigError("leach p must lie in (0, 1)")


def leach_threshold(p: float, r: int) -> float:
    """Self-election threshold at round r for nodes not yet head this epoch."""
    epoch = math.ceil(1.0 / p)
    return p / (1.0 - p * (r % epoch))


@dataclass
class LeachState:
    """Rotation memory: the 0-based round counter and the ids still eligible
    to self-elect in the current epoch (ceil(1/p) rounds)."""

    rounds: int = 0
    eligible: set[int] = field(default_factory=set)


def _direct_plan(head_nodes: list[NodeState], params: EnergyParams, bs: Position,
                 agg_len: float) -> RoutePlan:
    paths = {h.id: [h.id, BS_VERTEX] for h in head_nodes}
    costs = {h.id: bs_edge_cost(params, h, bs, agg_len).value for h in head_nodes}
    return RoutePlan(paths=paths, costs=costs)


def leach_round(nodes: list[NodeState], cfg: LeachConfig, params: EnergyParams,
                bs: Position, rng: RngStream, state: LeachState | None = None,
                agg_len: float = DEFAULT_AGG_LEN) -> RoundMetrics:
    """One LEACH round: probabilistic self-election with epoch rotation,
    members join the nearest head, heads transmit straight to the BS.

    Eligibility resets every ceil(1/p) rounds; a node that becomes head drops
    out of the epoch's eligible set, so with no deaths each node heads at
    most once per epoch. If nobody self-elects, the awake alive node nearest
    the BS is forced head so the round always drains someone.
    """
    cfg.validate()
    if state is None:
        state = LeachState()
    alive = [n for n in nodes if n.alive]
    if not alive:
        raise ValueError("leach_round requires at least one alive node")
    epoch = math.ceil(1.0 / cfg.p)
    r = state.rounds
    if r % epoch == 0:
        state.eligible = {n.id for n in alive}
    t = leach_threshold(cfg.p, r)
    heads = []
    for n in alive:  # id order fixes the draw sequence
        if n.awake and n.id in state.eligible and float(rng.random()) < t:
            heads.append(n)
            state.eligible.discard(n.id)
    if not heads:
        candidates = [n for n in alive if n.awake]
        if candidates:
            forced = min(candidates, key=lambda n: (distance(n.pos, bs), n.id))
            heads.append(forced)
            state.eligible.discard(forced.id)
    state.rounds += 1
    if not heads:
        return idle_round_metrics(nodes)  # every node asleep

    heads.sort(key=lambda n: n.id)
    cluster_of = {h.id: ci for ci, h in enumerate(heads)}
    labels: dict[int, int] = {}
    for n in alive:
        if not n.awake or n.id in cluster_of:
            continue
        nearest = min(heads, key=lambda h: (distance(n.pos, h.pos), h.id))
        labels[n.id] = cluster_of[nearest.id]
    assignment = ClusterAssignment(labels=labels,
                                   heads={ci: h.id for ci, h in enumerate(heads)},
                                   method="leach")
    plan = _direct_plan(heads, params, bs, agg_len)
    return execute_round(nodes, assignment, plan, params, bs, agg_len)


@dataclass
class FcmConfig:
    c: int | None = None  # None -> caller-supplied default (5% of alive)
    m: float = 2.0
    tol: float = 1e-5
    max_iter: int = 200

    def validate(self) -> None:
        if self.c is not None and self.c < 1:
            raise ConfigError("fcm c must be >= 1 when given")
        if self.m <= 1.0:
            raise ConfigError("fcm fuzziness m must be > 1")
        if self.tol <= 0:
            raise ConfigError("fcm tol must be positive")
        if self.max_iter < 1:
            raise ConfigError("fcm max_iter must be >= 1")


def fcm_memberships(points: np.ndarray, centroids: np.ndarray, m: float) -> np.ndarray:
    """Fuzzy membership matrix u (n, c) for the given centroids.

    u_ik is proportional to d_ik^(-2/(m-1)); a point coincident with a
    centroid gets membership 1 there (first such centroid) and 0 elsewhere.
    Rows sum to 1.
    """
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    n, c = d2.shape
    u = np.empty((n, c))
    zero_rows = (d2 <= 0.0).any(axis=1)
    if zero_rows.any():
        u[zero_rows] = 0.0
        first_zero = (d2[zero_rows] <= 0.0).argmax(axis=1)
        u[np.flatnonzero(zero_rows), first_zero] = 1.0
    ok = ~zero_rows
    if ok.any():
        inv = d2[ok] ** (-1.0 / (m - 1.0))
        u[ok] = inv / inv.sum(axis=1, keepdims=True)
    return u


@dataclass
class FcmResult:
    centroids: np.ndarray
    memberships: np.ndarray
    labels: np.ndarray
    objective_history: list[float] = field(default_factory=list)


def fcm_cluster(points: np.ndarray, c: int, m: float = 2.0, tol: float = 1e-5,
                max_iter: int = 200, rng: RngStream | None = None) -> FcmResult:
    """Fuzzy c-means on raw coordinates.

    Centroids initialize from c distinct points (seeded); iterations stop
    when the largest centroid shift falls below tol or max_iter is reached.
    objective_history records sum(u^m * d^2) once per iteration
    (non-increasing). Hard labels take each point's maximum membership.
    The iteration loop is compiled (_kernels.fcm_loop) because simulations
    re-cluster every round.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if c < 1 or c > n:
        raise ConfigError(f"c must be in [1, {n}], got {c}")
    if rng is None:
        rng = RngStream(0)
    centroids = points[rng.choice(n, size=c, replace=False)].copy()
    hist, count = _kernels.fcm_loop(points, centroids, m, tol, max_iter)
    history = [float(v) for v in hist[:count]]
    memberships = fcm_memberships(points, centroids, m)
    labels = memberships.argmax(axis=1)
    return FcmResult(centroids=centroids, memberships=memberships, labels=labels,
                     objective_history=history)


def fcm_round(nodes: list[NodeState], cfg: FcmConfig, params: EnergyParams,
              bs: Position, rng: RngStream, default_c: int = 1,
              agg_len: float = DEFAULT_AGG_LEN) -> RoundMetrics:
    """One FCM round: fuzzy position clustering, heads by residual energy,
    heads transmit straight to the BS.

    Hard labels can leave a cluster without members; empty clusters are
    dropped before head election. cfg.c overrides the caller-supplied default
    cluster count.
    """
    cfg.validate()
    participants = [n for n in nodes if n.alive and n.awake]
    if not participants:
        return idle_round_metrics(nodes)
    c = cfg.c if cfg.c is not None else default_c
    c = max(1, min(c, len(participants)))
    points = np.array([[n.pos.x, n.pos.y] for n in participants])
    result = fcm_cluster(points, c, cfg.m, cfg.tol, cfg.max_iter, rng)
    present = sorted({int(l) for l in result.labels})
    remap = {old: new for new, old in enumerate(present)}
    labels = [remap[int(l)] for l in result.labels]
    heads_map = elect_heads(participants, labels, rng)
    by_id = {n.id: n for n in participants}
    head_nodes = [by_id[hid] for hid in heads_map.values()]
    head_nodes.sort(key=lambda n: n.id)
    assignment = ClusterAssignment(
        labels={n.id: lab for n, lab in zip(participants, labels)},
        heads=heads_map, method="fcm")
    plan = _direct_plan(head_nodes, params, bs, agg_len)
    return execute_round(nodes, assignment, plan, params, bs, agg_len)
