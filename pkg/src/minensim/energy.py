"""First-order radio energy model and energy-aware edge costs.

Transmission energy follows the two-regime amplifier model: free-space (d^2)
below the crossover distance d0 and multipath (d^4) at or above it, with
d0 = sqrt(eps_fs / eps_mp) always derived from the amplifier constants.
Edge costs combine reception energy, transmission energy, and the energy
already drained from both endpoints, weighted by w1/w2/w3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ConfigError, NodeState, Position, distance


@dataclass(frozen=True)
class EnergyParams:
    """Radio constants and cost weights.

    Defaults: e_elec = 50 nJ/bit, eps_fs = 10 pJ/bit/m^2,
    eps_mp = 0.0013 pJ/bit/m^4, unit weights, one time unit per round.
    """

    e_elec: float = 50e-9
    eps_fs: float = 10e-12
    eps_mp: float = 0.0013e-12
    w1: float = 1.0
    w2: float = 1.0
    w3: float = 1.0
    round_time: float = 1.0

    @property
    def d0(self) -> float:
        """Crossover distance between the d^2 and d^4 amplifier regimes."""
        return math.sqrt(self.eps_fs / self.eps_mp)

    def validate(self) -> None:
        if self.e_elec <= 0 or self.eps_fs <= 0 or self.eps_mp <= 0:
            raise ConfigError("radio constants must be positive")
        if self.w1 < 0 or self.w2 < 0 or self.w3 < 0:
            raise ConfigError("cost weights must be non-negative")
        if self.round_time <= 0:
            raise ConfigError("round_time must be positive")


@dataclass(frozen=True)
class EdgeCost:
    """Decomposed cost of one directed link: value = w1*rx + w2*tx + w3*esf."""

    value: float
    rx_part: float
    tx_part: float
    esf_part: float


def tx_energy(params: EnergyParams, d: float, l: float) -> float:
    """Energy in joules to transmit l bits over distance d meters."""
    if l <= 0:
        raise ValueError("message length must be positive")
    if d < 0:
        raise ValueError("distance must be non-negative")
    if d < params.d0:
        return (params.e_elec + params.eps_fs * d * d) * l
    return (params.e_elec + params.eps_mp * d ** 4) * l


def rx_energy(params: EnergyParams, l: float) -> float:
    """Energy in joules to receive l bits."""
    if l <= 0:
        raise ValueError("message length must be positive")
    return params.e_elec * l


def rate(l: float, params: EnergyParams) -> float:
    """Bits per time unit when l bits are sent once per round."""
    if l <= 0:
        raise ValueError("message length must be positive")
    return l / params.round_time


def energy_spent_so_far(i: NodeState, j: NodeState) -> float:
    """Total energy already drained from both endpoints of a link."""
    return (i.initial_energy - i.energy) + (j.initial_energy - j.energy)


def edge_cost(params: EnergyParams, i: NodeState, j: NodeState, l: float) -> EdgeCost:
    """Cost of the directed link i -> j carrying l bits.

    Combines j's reception energy, i's transmission energy over the
    geometric distance, and the drained-energy term for both endpoints.
    """
    if i.id == j.id:
        raise ValueError("edge endpoints must differ")
    if not (i.alive and j.alive):
        raise ValueError("edge endpoints must be alive")
    rx = rx_energy(params, l)
    tx = tx_energy(params, distance(i.pos, j.pos), l)
    esf = energy_spent_so_far(i, j)
    value = params.w1 * rx + params.w2 * tx + params.w3 * esf
    return EdgeCost(value=value, rx_part=rx, tx_part=tx, esf_part=esf)


def bs_edge_cost(params: EnergyParams, i: NodeState, bs: Position, l: float) -> EdgeCost:
    """Cost of the final hop i -> base station.

    The base station is mains-powered: no reception term and no drained-energy
    contribution on its side.
    """
    if not i.alive:
        raise ValueError("edge endpoint must be alive")
    tx = tx_energy(params, distance(i.pos, bs), l)
    esf = i.initial_energy - i.energy
    value = params.w2 * tx + params.w3 * esf
    return EdgeCost(value=value, rx_part=0.0, tx_part=tx, esf_part=esf)
