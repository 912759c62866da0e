"""Core domain types, deterministic RNG stream, and network construction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """A configuration value violates its documented contract."""


@dataclass(frozen=True)
class Position:
    """A point in the deployment area, in meters."""

    x: float
    y: float


def distance(a: Position, b: Position) -> float:
    """Euclidean distance between two positions, in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass
class NodeState:
    """Mutable per-node simulation state.

    msg_len and sensed_data are fixed per-node profiles in bits per round.
    energy is clamped to [0, initial_energy]; a node is dead exactly when its
    energy reaches zero. awake is reset to True at the end of every round.
    """

    id: int
    pos: Position
    energy: float
    initial_energy: float
    msg_len: int
    sensed_data: int
    alive: bool = True
    awake: bool = True


@dataclass
class RoundMetrics:
    """Per-round snapshot; counts reflect the state after deaths are applied.

    awake counts the nodes that participated in the round (alive at round
    start and not scheduled asleep). energy_spent is the sum of every
    individual tx/rx deduction made during the round, which conservation
    tests compare against the drop in total_energy.
    """

    round: int
    alive: int
    awake: int
    total_energy: float
    heads: int
    path_cost_total: float
    energy_spent: float


class RngStream:
    """Seeded random stream: same seed and same call sequence give the same
    outputs. Thin wrapper over numpy's PCG64 generator."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def __getattr__(self, name):
        return getattr(self._gen, name)

    def __repr__(self):
        return f"RngStream(seed={self.seed})"


@dataclass
class NetworkConfig:
    """Static description of a deployment.

    cluster_count=None means "5% of currently-alive nodes, minimum 1",
    re-evaluated every round. bs_pos=None places the base station at the
    area center.
    """

    node_count: int = 300
    area_width: float = 250.0
    area_height: float = 250.0
    bs_pos: Position | None = None
    initial_energy: float = 2.0
    msg_len_range: tuple[int, int] = (500, 4000)
    sensed_data_range: tuple[int, int] = (500, 4000)
    cluster_count: int | None = None
    sensing_radius: float = 25.0
    coverage_grid_cells: int = 50
    rng_seed: int = 1

    def resolved_bs(self) -> Position:
        if self.bs_pos is not None:
            return self.bs_pos
        return Position(self.area_width / 2.0, self.area_height / 2.0)

    def cluster_count_for(self, alive_count: int) -> int:
        """Cluster count for a round with the given number of alive nodes."""
        if self.cluster_count is not None:
            k = self.cluster_count
        else:
            k = max(1, int(0.05 * alive_count))
        return max(1, min(k, alive_count))

    def validate(self) -> None:
        if self.node_count < 1:
            raise ConfigError("node_count must be >= 1")
        if self.area_width <= 0 or self.area_height <= 0:
            raise ConfigError("area dimensions must be positive")
        if self.initial_energy <= 0:
            raise ConfigError("initial_energy must be positive")
        for name, rng in (("msg_len_range", self.msg_len_range),
                          ("sensed_data_range", self.sensed_data_range)):
            lo, hi = rng
            if lo <= 0 or hi < lo:
                raise ConfigError(f"{name} must satisfy 0 < min <= max")
        if self.cluster_count is not None and self.cluster_count < 1:
            raise ConfigError("cluster_count must be >= 1 when given")
        if self.sensing_radius <= 0:
            raise ConfigError("sensing_radius must be positive")
        if self.coverage_grid_cells < 1:
            raise ConfigError("coverage_grid_cells must be >= 1")
        bs = self.resolved_bs()
        if not (0 <= bs.x <= self.area_width and 0 <= bs.y <= self.area_height):
            raise ConfigError("bs_pos must lie inside the deployment area")


def build_network(config: NetworkConfig, rng: RngStream) -> list[NodeState]:
    """Build the initial node population.

    Pure function of (config, rng seed). Positions are uniform over the area;
    traffic profiles are drawn uniformly (integer bits, inclusive bounds) from
    the configured ranges. Draw order: x coords, y coords, msg lengths,
    sensed-data sizes, each as one vectorized call.
    """
    config.validate()
    n = config.node_count
    xs = rng.uniform(0.0, config.area_width, n)
    ys = rng.uniform(0.0, config.area_height, n)
    msg_lo, msg_hi = config.msg_len_range
    sd_lo, sd_hi = config.sensed_data_range
    msg = rng.integers(msg_lo, msg_hi + 1, n)
    sensed = rng.integers(sd_lo, sd_hi + 1, n)
    return [
        NodeState(
            id=i,
            pos=Position(float(xs[i]), float(ys[i])),
            energy=config.initial_energy,
            initial_energy=config.initial_energy,
            msg_len=int(msg[i]),
            sensed_data=int(sensed[i]),
        )
        for i in range(n)
    ]
