"""minensim: round-based simulator for energy-efficient routing in wireless
IoT sensor networks.

The library models a field of battery-powered sensor nodes that form
clusters, elect heads on residual energy, and relay aggregated traffic to a
base station along energy-aware shortest paths. Optional metaheuristic sleep
schedulers put redundant nodes to sleep each round. LEACH-style probabilistic
rotation and fuzzy c-means clustering are included as baselines.
"""

from .baselines import (FcmConfig, FcmResult, LeachConfig, LeachState,
                        fcm_cluster, fcm_memberships, fcm_round,
                        leach_round, leach_threshold)
from .clustering import (ClusterAssignment, GmmModel, GmmResult, KmeansResult,
                         elect_heads, extract_features, gmm_fit, kmeans)
from .config import (ClusteringOpts, SimConfig, load_config, parse_config,
                     variant_config, with_seed)
from .core import (ConfigError, NetworkConfig, NodeState, Position,
                   RngStream, RoundMetrics, build_network, distance)
from .energy import (EdgeCost, EnergyParams, bs_edge_cost, edge_cost,
                     energy_spent_so_far, rate, rx_energy, tx_energy)
from .routing import (BS_VERTEX, DEFAULT_AGG_LEN, GraphEdge, HeadGraph,
                      RoutePlan, build_head_graph, dijkstra, execute_round,
                      idle_round_metrics, plan_routes)
from .sim import (METRICS_HEADER, RunSummary, output_files,
                  percent_dead_round, run_simulation, write_outputs)
from .sleepsched import (SCHEDULERS, CoverageContext, SchedulerConfig,
                         SleepSolution, coverage_of, crossover, fitness,
                         ga_schedule, gso_schedule, mutate, pso_schedule)

__version__ = "0.1.0"

__all__ = [
    "BS_VERTEX", "ClusterAssignment", "ClusteringOpts", "ConfigError",
    "CoverageContext", "DEFAULT_AGG_LEN", "EdgeCost", "EnergyParams",
    "FcmConfig", "FcmResult", "GmmModel", "GmmResult", "GraphEdge",
    "HeadGraph", "KmeansResult", "LeachConfig", "LeachState",
    "METRICS_HEADER", "NetworkConfig", "NodeState", "Position",
    "RngStream", "RoundMetrics", "RoutePlan", "RunSummary", "SCHEDULERS",
    "SchedulerConfig", "SimConfig", "SleepSolution", "__version__",
    "bs_edge_cost", "build_head_graph", "build_network", "coverage_of",
    "crossover", "dijkstra", "distance", "edge_cost", "elect_heads",
    "energy_spent_so_far", "execute_round", "extract_features",
    "fcm_cluster", "fcm_memberships", "fcm_round", "fitness",
    "ga_schedule", "gmm_fit", "gso_schedule", "idle_round_metrics",
    "kmeans", "leach_round", "leach_threshold", "load_config", "mutate",
    "output_files", "parse_config", "percent_dead_round", "plan_routes",
    "pso_schedule", "rate", "run_simulation", "rx_energy", "tx_energy",
    "variant_config", "with_seed", "write_outputs",
]
