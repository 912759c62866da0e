"""Sleep scheduling: coverage accounting, the fitness function, and the
GSO / GA / binary-PSO optimizers.

A schedule is a boolean array over the currently-alive nodes: True means the
node sleeps this round. Fitness rewards sending energy-rich nodes to sleep
(term 1) and, as written, also rewards reduced awake coverage (term 2); the
coverage_preserving flag flips term 2 to reward retained coverage instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .core import ConfigError, NodeState, RngStream

PSO_OMEGA = 0.7
PSO_C1 = 1.5
PSO_C2 = 1.5
PSO_V_CLAMP = 4.0


@dataclass
class SchedulerConfig:
    algorithm: str = "none"  # gso | ga | pso | none
    alpha: float = 0.34
    beta: float = 0.33
    max_iterations: int = 50
    population_size: int = 30
    mutation_rate: float | None = None  # None -> 1 / solution length
    coverage_preserving: bool = False

    def validate(self) -> None:
        if self.algorithm not in ("gso", "ga", "pso", "none"):
            raise ConfigError(f"unknown scheduler algorithm {self.algorithm!r}")
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("fitness weights must be non-negative")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.population_size < 2:
            raise ConfigError("population_size must be >= 2")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("mutation_rate must lie in [0, 1]")


@dataclass
class SleepSolution:
    """asleep[i] says whether the i-th node of the scheduled population
    sleeps this round; fitness is the schedule's score."""

    asleep: np.ndarray
    fitness: float


class CoverageContext:
    """Precomputed sensing geometry for a fixed node layout.

    The area splits into grid_cells x grid_cells cells; cell (i, j) is the
    i-th row from y=0 and j-th column from x=0, with center
    ((j + 0.5) * w / g, (i + 0.5) * h / g). A node covers a cell when the
    cell center lies within sensing_radius (boundary inclusive). Row-major
    cell index = i * g + j. Coverage masks are bit-packed per node for the
    scheduler kernels.
    """

    def __init__(self, positions, area_width: float, area_height: float,
                 grid_cells: int, sensing_radius: float):
        positions = np.asarray(positions, dtype=float)
        g = int(grid_cells)
        if g < 1:
            raise ConfigError("grid resolution must be >= 1")
        self.grid_cells = g
        self.cell_count = g * g
        cx = (np.arange(g) + 0.5) * (area_width / g)
        cy = (np.arange(g) + 0.5) * (area_height / g)
        xx, yy = np.meshgrid(cx, cy)
        self.cell_centers = np.stack([xx.ravel(), yy.ravel()], axis=1)
        d2 = ((positions[:, 0:1] - self.cell_centers[None, :, 0]) ** 2
              + (positions[:, 1:2] - self.cell_centers[None, :, 1]) ** 2)
        self.covers = d2 <= sensing_radius ** 2  # (n_nodes, cells) bool
        words = (self.cell_count + 63) // 64
        bits = np.zeros((positions.shape[0], words * 64), dtype=np.uint64)
        bits[:, : self.cell_count] = self.covers
        weights = np.left_shift(np.uint64(1), np.arange(64, dtype=np.uint64))
        self.packed = (bits.reshape(-1, words, 64) * weights).sum(axis=2, dtype=np.uint64)

    def coverage_count(self, node_ids) -> int:
        """Cells covered by at least one of the given nodes."""
        ids = np.asarray(list(node_ids), dtype=int)
        if ids.size == 0:
            return 0
        acc = np.bitwise_or.reduce(self.packed[ids], axis=0)
        return int(np.unpackbits(acc.view(np.uint8)).sum())

    def covered_mask(self, node_ids) -> np.ndarray:
        """(g, g) boolean grid of cells covered by the given nodes."""
        ids = np.asarray(list(node_ids), dtype=int)
        g = self.grid_cells
        if ids.size == 0:
            return np.zeros((g, g), dtype=bool)
        return np.any(self.covers[ids], axis=0).reshape(g, g)


def coverage_of(awake_nodes: list[NodeState], grid: CoverageContext) -> int:
    """Cells covered by at least one alive, awake node in the list."""
    return grid.coverage_count(n.id for n in awake_nodes if n.alive and n.awake)


def _asleep_array(solution, n: int) -> np.ndarray:
    asleep = np.asarray(getattr(solution, "asleep", solution), dtype=bool)
    if asleep.shape != (n,):
        raise ValueError(f"solution length {asleep.shape} does not match population {n}")
    return asleep


def fitness(solution, nodes: list[NodeState], coverage_ctx: CoverageContext,
            cfg: SchedulerConfig) -> float:
    """Score of a sleep schedule over the given alive population.

    term1 = 1 - awake_energy / total_energy, term2 = 1 - awake_cov / total_cov
    (or awake_cov / total_cov when cfg.coverage_preserving); value is
    alpha * term1 + beta * term2 with zero denominators contributing 0.
    Energy sums accumulate left to right in node order, matching the compiled
    scheduler kernels bit for bit.
    """
    asleep = _asleep_array(solution, len(nodes))
    total_e = 0.0
    awake_e = 0.0
    for node, slp in zip(nodes, asleep):
        total_e += node.energy
        if not slp:
            awake_e += node.energy
    if total_e > 0.0:
        term1 = 1.0 - awake_e / total_e
    else:
        term1 = 0.0
    total_cov = coverage_ctx.coverage_count(n.id for n in nodes)
    if total_cov > 0:
        awake_cov = coverage_ctx.coverage_count(
            n.id for n, slp in zip(nodes, asleep) if not slp)
        ratio = awake_cov / total_cov
        term2 = ratio if cfg.coverage_preserving else 1.0 - ratio
    else:
        term2 = 0.0
    return cfg.alpha * term1 + cfg.beta * term2


def mutate(solution, rate: float, rng: RngStream) -> np.ndarray:
    """Flip each gene independently with the given probability."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("mutation rate must lie in [0, 1]")
    asleep = np.asarray(getattr(solution, "asleep", solution), dtype=bool)
    flips = rng.random(asleep.shape[0]) < rate
    return asleep ^ flips


def crossover(a, b, rng: RngStream) -> np.ndarray:
    """Uniform crossover: each gene comes from a or b with probability 0.5."""
    a = np.asarray(getattr(a, "asleep", a), dtype=bool)
    b = np.asarray(getattr(b, "asleep", b), dtype=bool)
    if a.shape != b.shape:
        raise ValueError("parents must have equal length")
    take_a = rng.random(a.shape[0]) < 0.5
    return np.where(take_a, a, b)


def _prepare(nodes, ctx, cfg):
    cfg.validate()
    if not nodes:
        raise ValueError("scheduler needs at least one node")
    for nd in nodes:
        if not nd.alive:
            raise ValueError("scheduler population must be alive")
    energies = np.array([nd.energy for nd in nodes], dtype=float)
    ids = [nd.id for nd in nodes]
    packed = np.ascontiguousarray(ctx.packed[ids])
    total_e = 0.0
    for e in energies:
        total_e += float(e)
    total_cov = float(ctx.coverage_count(ids))
    rate = cfg.mutation_rate if cfg.mutation_rate is not None else 1.0 / len(nodes)
    return energies, packed, total_e, total_cov, rate


def _initial_population(initial, pop: int, n: int, rng: RngStream) -> np.ndarray:
    """Random uniform boolean population; the first randomness a scheduler
    consumes, so callers can replay it from the same seed."""
    if initial is None:
        return rng.random((pop, n)) < 0.5
    arr = np.ascontiguousarray(np.asarray(initial, dtype=bool))
    if arr.shape != (pop, n):
        raise ValueError(f"initial population must have shape ({pop}, {n})")
    return arr.copy()


def gso_schedule(nodes, coverage_ctx, cfg, rng, initial_population=None,
                 history: list | None = None) -> SleepSolution:
    """Group-search sleep scheduler.

    Draws a random population, seeds local/global best from its fittest
    member, then runs max_iterations index-order sweeps: each particle is
    mutated, crossed with the local best with probability 1 - p/pop or else
    with the global best with probability p/pop, and re-evaluated; the
    persistent local best and the returned global best only ever improve.
    Per-generation randomness: mutation uniforms (pop, n), crossover uniforms
    (pop, n), gate uniforms (pop, 2), in that order. history (if given)
    receives the global-best fitness after every generation.
    """
    energies, packed, total_e, total_cov, rate = _prepare(nodes, coverage_ctx, cfg)
    pop, n = cfg.population_size, len(nodes)
    pop_arr = _initial_population(initial_population, pop, n, rng)
    fits = _k.eval_population(pop_arr, energies, packed, total_e, total_cov,
                              cfg.alpha, cfg.beta, cfg.coverage_preserving)
    b = int(np.argmax(fits))
    local_best = pop_arr[b].copy()
    global_best = pop_arr[b].copy()
    lb_fit = gb_fit = float(fits[b])
    for _ in range(cfg.max_iterations):
        r_mut = rng.random((pop, n))
        r_cross = rng.random((pop, n))
        r_gate = rng.random((pop, 2))
        lb_fit, gb_fit = _k.gso_generation(
            pop_arr, local_best, global_best, lb_fit, gb_fit,
            energies, packed, total_e, total_cov,
            cfg.alpha, cfg.beta, cfg.coverage_preserving, rate,
            r_mut, r_cross, r_gate)
        if history is not None:
            history.append(gb_fit)
    return SleepSolution(asleep=global_best, fitness=gb_fit)


def ga_schedule(nodes, coverage_ctx, cfg, rng, initial_population=None,
                history: list | None = None) -> SleepSolution:
    """Generational GA with uniform crossover and best-ever elitism.

    Each child picks two distinct random parents, mutates copies of both,
    then crosses them gene-wise. Per-generation randomness: parent uniforms
    (pop, 2), mutation uniforms (pop, 2, n), crossover uniforms (pop, n).
    """
    energies, packed, total_e, total_cov, rate = _prepare(nodes, coverage_ctx, cfg)
    pop, n = cfg.population_size, len(nodes)
    pop_arr = _initial_population(initial_population, pop, n, rng)
    fits = _k.eval_population(pop_arr, energies, packed, total_e, total_cov,
                              cfg.alpha, cfg.beta, cfg.coverage_preserving)
    b = int(np.argmax(fits))
    best = pop_arr[b].copy()
    best_fit = float(fits[b])
    new_pop = np.empty_like(pop_arr)
    for _ in range(cfg.max_iterations):
        r_parent = rng.random((pop, 2))
        r_mut = rng.random((pop, 2, n))
        r_cross = rng.random((pop, n))
        best_fit = _k.ga_generation(
            pop_arr, new_pop, best, best_fit,
            energies, packed, total_e, total_cov,
            cfg.alpha, cfg.beta, cfg.coverage_preserving, rate,
            r_parent, r_mut, r_cross)
        pop_arr, new_pop = new_pop, pop_arr
        if history is not None:
            history.append(best_fit)
    return SleepSolution(asleep=best, fitness=best_fit)


def pso_schedule(nodes, coverage_ctx, cfg, rng, initial_population=None,
                 history: list | None = None) -> SleepSolution:
    """Binary PSO: real velocities, sigmoid gene regeneration.

    v <- 0.7 v + 1.5 r1 (pbest - x) + 1.5 r2 (gbest - x), clamped to [-4, 4];
    each gene then becomes 1 with probability sigmoid(v). Velocities start at
    zero. Per-iteration randomness: r1 (pop, n), r2 (pop, n), regeneration
    uniforms (pop, n).
    """
    energies, packed, total_e, total_cov, _ = _prepare(nodes, coverage_ctx, cfg)
    pop, n = cfg.population_size, len(nodes)
    x = _initial_population(initial_population, pop, n, rng)
    v = np.zeros((pop, n))
    fits = _k.eval_population(x, energies, packed, total_e, total_cov,
                              cfg.alpha, cfg.beta, cfg.coverage_preserving)
    pbest = x.copy()
    pbest_fit = fits.copy()
    b = int(np.argmax(fits))
    gbest = x[b].copy()
    gbest_fit = float(fits[b])
    for _ in range(cfg.max_iterations):
        r1 = rng.random((pop, n))
        r2 = rng.random((pop, n))
        r_regen = rng.random((pop, n))
        gbest_fit = _k.pso_iteration(
            x, v, pbest, pbest_fit, gbest, gbest_fit,
            energies, packed, total_e, total_cov,
            cfg.alpha, cfg.beta, cfg.coverage_preserving,
            PSO_OMEGA, PSO_C1, PSO_C2, PSO_V_CLAMP,
            r1, r2, r_regen)
        if history is not None:
            history.append(gbest_fit)
    return SleepSolution(asleep=gbest, fitness=gbest_fit)


SCHEDULERS = {
    "gso": gso_schedule,
    "ga": ga_schedule,
    "pso": pso_schedule,
}
