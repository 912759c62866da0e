"""Head-level route planning and round execution.

Heads form a complete directed graph plus one edge each to the base station
(vertex -1, no outgoing edges). Path selection minimizes summed edge cost
with deterministic tie-breaking: fewer hops first, then lexicographically
smaller vertex sequence.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .clustering import ClusterAssignment
from .core import NodeState, Position, RoundMetrics, distance
from .energy import EdgeCost, EnergyParams, bs_edge_cost, edge_cost, rx_energy, tx_energy

BS_VERTEX = -1

DEFAULT_AGG_LEN = 4000  # bits per aggregated head message


@dataclass(frozen=True)
class GraphEdge:
    cost: EdgeCost
    msg_len: float


@dataclass
class HeadGraph:
    head_ids: list[int]
    edges: dict[int, dict[int, GraphEdge]]


@dataclass
class RoutePlan:
    """Per-head path (ending at BS_VERTEX) and its total edge cost."""

    paths: dict[int, list[int]]
    costs: dict[int, float]


def build_head_graph(head_ids, nodes: list[NodeState], bs: Position,
                     params: EnergyParams, agg_len: float = DEFAULT_AGG_LEN) -> HeadGraph:
    """Complete digraph over the heads plus a head -> BS edge each.

    Every edge out of a head carries that head's aggregated message length.
    """
    by_id = {n.id: n for n in nodes}
    heads = sorted(int(h) for h in head_ids)
    edges: dict[int, dict[int, GraphEdge]] = {}
    for u in heads:
        out: dict[int, GraphEdge] = {}
        for v in heads:
            if v != u:
                out[v] = GraphEdge(edge_cost(params, by_id[u], by_id[v], agg_len), agg_len)
        out[BS_VERTEX] = GraphEdge(bs_edge_cost(params, by_id[u], bs, agg_len), agg_len)
        edges[u] = out
    return HeadGraph(head_ids=heads, edges=edges)


def dijkstra(graph: HeadGraph, source: int) -> tuple[list[int], float]:
    """Minimum-cost path from source to the base station.

    Ties break on fewer hops, then on the lexicographically smallest vertex
    sequence, so equal-cost graphs always yield the same route.
    """
    if source not in graph.edges:
        raise ValueError(f"source {source} is not a vertex of the graph")
    heap: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (source,))]
    visited: set[int] = set()
    while heap:
        cost, hops, path = heapq.heappop(heap)
        v = path[-1]
        if v in visited:
            continue
        visited.add(v)
        if v == BS_VERTEX:
            return list(path), cost
        for w, edge in graph.edges.get(v, {}).items():
            if w not in visited:
                heapq.heappush(heap, (cost + edge.cost.value, hops + 1, path + (w,)))
    raise RuntimeError("base station unreachable from source")


def plan_routes(graph: HeadGraph) -> RoutePlan:
    """Shortest path to the base station for every head."""
    paths: dict[int, list[int]] = {}
    costs: dict[int, float] = {}
    for h in graph.head_ids:
        path, cost = dijkstra(graph, h)
        paths[h] = path
        costs[h] = cost
    return RoutePlan(paths=paths, costs=costs)


def execute_round(nodes: list[NodeState], assignment: ClusterAssignment,
                  plan: RoutePlan, params: EnergyParams, bs: Position,
                  agg_len: float = DEFAULT_AGG_LEN) -> RoundMetrics:
    """Charge one communication round against the node energies.

    Awake non-head members transmit their own message to their head, which
    pays reception per message. Each head then sends one aggregated message
    of agg_len bits along its planned path; every relay pays reception plus
    retransmission, the base station pays nothing. Deductions clamp at zero
    (a node may finish the transmission that exhausts it) and deaths apply at
    the end of the round. Returns the round ledger; energy_spent equals the
    exact sum of all deductions.
    """
    by_id = {n.id: n for n in nodes}
    spent = 0.0

    def deduct(node: NodeState, amount: float) -> None:
        nonlocal spent
        take = amount if amount < node.energy else node.energy
        node.energy -= take
        spent += take

    head_ids = set(assignment.heads.values())
    awake_count = sum(1 for n in nodes if n.alive and n.awake)

    for node in nodes:  # node list is id-ordered; keeps the ledger deterministic
        if not (node.alive and node.awake) or node.id in head_ids:
            continue
        lab = assignment.labels.get(node.id)
        if lab is None:
            continue
        head = by_id[assignment.heads[lab]]
        deduct(node, tx_energy(params, distance(node.pos, head.pos), node.msg_len))
        deduct(head, rx_energy(params, node.msg_len))

    for cluster in sorted(assignment.heads):
        h = assignment.heads[cluster]
        path = plan.paths[h]
        for a, b in zip(path, path[1:]):
            sender = by_id[a]
            if b == BS_VERTEX:
                deduct(sender, tx_energy(params, distance(sender.pos, bs), agg_len))
            else:
                receiver = by_id[b]
                deduct(sender, tx_energy(params, distance(sender.pos, receiver.pos), agg_len))
                deduct(receiver, rx_energy(params, agg_len))

    alive = 0
    total = 0.0
    for n in nodes:
        if n.alive and n.energy <= 0.0:
            n.energy = 0.0
            n.alive = False
            n.awake = False
        if n.alive:
            alive += 1
        total += n.energy

    path_cost_total = 0.0
    for cluster in sorted(assignment.heads):
        path_cost_total += plan.costs[assignment.heads[cluster]]

    return RoundMetrics(round=0, alive=alive, awake=awake_count,
                        total_energy=total, heads=len(assignment.heads),
                        path_cost_total=path_cost_total, energy_spent=spent)


def idle_round_metrics(nodes: list[NodeState]) -> RoundMetrics:
    """Ledger for a round in which nobody transmitted (e.g. all asleep)."""
    alive = 0
    awake = 0
    total = 0.0
    for n in nodes:
        if n.alive:
            alive += 1
            if n.awake:
                awake += 1
        total += n.energy
    return RoundMetrics(round=0, alive=alive, awake=awake, total_energy=total,
                        heads=0, path_cost_total=0.0, energy_spent=0.0)
