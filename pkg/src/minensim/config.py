"""Run configuration: JSON parsing, documented defaults, strict key checks.

Missing keys take their defaults; unknown keys are a hard error. The raw
dict is kept so `compare` variants can be rebuilt by deep-merging overrides.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .baselines import FcmConfig, LeachConfig
from .core import ConfigError, NetworkConfig, Position
from .energy import EnergyParams
from .routing import DEFAULT_AGG_LEN
from .sleepsched import SchedulerConfig

PROTOCOLS = ("minen", "leach", "fcm")
CLUSTERING_METHODS = ("kmeans", "gmm")

DEFAULT_ROUND_CAP = 20000


@dataclass
class ClusteringOpts:
    kmeans_max_iter: int = 100
    gmm_max_iter: int = 200
    gmm_tol: float = 1e-6
    gmm_reg: float = 1e-6

    def validate(self) -> None:
        if self.kmeans_max_iter < 1 or self.gmm_max_iter < 1:
            raise ConfigError("clustering iteration caps must be >= 1")
        if self.gmm_tol <= 0 or self.gmm_reg <= 0:
            raise ConfigError("gmm tol/reg must be positive")


@dataclass
class SimConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    energy: EnergyParams = field(default_factory=EnergyParams)
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    leach: LeachConfig = field(default_factory=LeachConfig)
    fcm: FcmConfig = field(default_factory=FcmConfig)
    clustering: str = "gmm"
    clustering_opts: ClusteringOpts = field(default_factory=ClusteringOpts)
    protocol: str = "minen"
    aggregated_len_bits: int = DEFAULT_AGG_LEN
    round_cap: int = DEFAULT_ROUND_CAP
    seeds: list[int] | None = None
    variants: list[dict] | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def validate(self) -> None:
        self.network.validate()
        self.energy.validate()
        self.scheduler.validate()
        self.leach.validate()
        self.fcm.validate()
        self.clustering_opts.validate()
        if self.clustering not in CLUSTERING_METHODS:
            raise ConfigError(f"clustering must be one of {CLUSTERING_METHODS}")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}")
        if self.aggregated_len_bits < 1:
            raise ConfigError("aggregated_len_bits must be >= 1")
        if self.round_cap < 1:
            raise ConfigError("round_cap must be >= 1")


_TOP_KEYS = {"network", "energy", "scheduler", "leach", "fcm", "clustering",
             "clustering_opts", "protocol", "aggregated_len_bits", "round_cap",
             "seeds", "variants"}
_NETWORK_KEYS = {"node_count", "area_width", "area_height", "bs_pos",
                 "initial_energy", "msg_len_range", "sensed_data_range",
                 "cluster_count", "sensing_radius", "coverage_grid_cells",
                 "rng_seed"}
_ENERGY_KEYS = {"e_elec", "eps_fs", "eps_mp", "w1", "w2", "w3", "round_time"}
_SCHEDULER_KEYS = {"algorithm", "alpha", "beta", "max_iterations",
                   "population_size", "mutation_rate", "coverage_preserving"}
_LEACH_KEYS = {"p"}
_FCM_KEYS = {"c", "m", "tol", "max_iter"}
_CLUSTERING_OPT_KEYS = {"kmeans_max_iter", "gmm_max_iter", "gmm_tol", "gmm_reg"}


def _check_keys(data: dict, allowed: set, where: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        if where == "energy" and "d_o" in unknown:
            raise ConfigError("energy.d_o is always derived from eps_fs/eps_mp "
                              "and cannot be configured")
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _pair(value, name: str) -> tuple:
    if (not isinstance(value, (list, tuple)) or len(value) != 2):
        raise ConfigError(f"{name} must be a [min, max] pair")
    return (value[0], value[1])


def _parse_network(data: dict) -> NetworkConfig:
    _check_keys(data, _NETWORK_KEYS, "network")
    kwargs = dict(data)
    if "bs_pos" in kwargs and kwargs["bs_pos"] is not None:
        pos = kwargs["bs_pos"]
        if not isinstance(pos, (list, tuple)) or len(pos) != 2:
            raise ConfigError("network.bs_pos must be an [x, y] pair")
        kwargs["bs_pos"] = Position(float(pos[0]), float(pos[1]))
    for key in ("msg_len_range", "sensed_data_range"):
        if key in kwargs:
            kwargs[key] = _pair(kwargs[key], f"network.{key}")
    return NetworkConfig(**kwargs)


def parse_config(data: dict) -> SimConfig:
    """Build a validated SimConfig from a parsed JSON document."""
    _check_keys(data, _TOP_KEYS, "config")
    network = _parse_network(data.get("network", {}))
    energy_data = data.get("energy", {})
    _check_keys(energy_data, _ENERGY_KEYS, "energy")
    energy = EnergyParams(**energy_data)
    sched_data = data.get("scheduler", {})
    _check_keys(sched_data, _SCHEDULER_KEYS, "scheduler")
    scheduler = SchedulerConfig(**sched_data)
    leach_data = data.get("leach", {})
    _check_keys(leach_data, _LEACH_KEYS, "leach")
    leach = LeachConfig(**leach_data)
    fcm_data = data.get("fcm", {})
    _check_keys(fcm_data, _FCM_KEYS, "fcm")
    fcm = FcmConfig(**fcm_data)
    opts_data = data.get("clustering_opts", {})
    _check_keys(opts_data, _CLUSTERING_OPT_KEYS, "clustering_opts")
    opts = ClusteringOpts(**opts_data)

    seeds = data.get("seeds")
    if seeds is not None:
        if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
            raise ConfigError("seeds must be a list of integers")
        seeds = list(seeds)
    variants = data.get("variants")
    if variants is not None:
        if (not isinstance(variants, list)
                or not all(isinstance(v, dict) for v in variants)):
            raise ConfigError("variants must be a list of objects")
        variants = copy.deepcopy(variants)

    cfg = SimConfig(
        network=network,
        energy=energy,
        scheduler=scheduler,
        leach=leach,
        fcm=fcm,
        clustering=data.get("clustering", "gmm"),
        clustering_opts=opts,
        protocol=data.get("protocol", "minen"),
        aggregated_len_bits=data.get("aggregated_len_bits", DEFAULT_AGG_LEN),
        round_cap=data.get("round_cap", DEFAULT_ROUND_CAP),
        seeds=seeds,
        variants=variants,
        raw=copy.deepcopy(data),
    )
    cfg.validate()
    return cfg


def load_config(path) -> SimConfig:
    """Read and parse a JSON config file; any problem is a ConfigError."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(data)


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key in out and isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def variant_config(base: SimConfig, overrides: dict) -> SimConfig:
    """Config for one compare variant: base document + overrides, re-parsed."""
    overrides = {k: v for k, v in overrides.items() if k != "name"}
    merged = _deep_merge(base.raw, overrides)
    merged.pop("variants", None)
    merged.pop("seeds", None)
    return parse_config(merged)


def with_seed(cfg: SimConfig, seed: int) -> SimConfig:
    """Copy of the config with the network rng seed replaced."""
    return replace(cfg, network=replace(cfg.network, rng_seed=int(seed)))
