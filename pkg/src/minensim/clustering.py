"""Feature extraction, k-means / GMM clustering, and head election.

Clustering operates on three per-node features: distance to the base
station, message length, and sensed-data size, each z-scored over the
current population. The GMM uses one covariance matrix shared by all
components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import ConfigError, NodeState, Position, RngStream, distance

FEATURE_NAMES = ("dist_to_bs", "msg_len", "sensed_data")


def extract_features(nodes: list[NodeState], bs: Position) -> np.ndarray:
    """Per-node feature matrix, z-scored per column over the given population.

    Columns: distance to BS, message length, sensed-data size. Uses the
    population standard deviation; a zero-variance column becomes all zeros.
    Returns an (n, 3) array aligned with the input list; empty input gives an
    empty array.
    """
    if not nodes:
        return np.zeros((0, len(FEATURE_NAMES)))
    raw = np.array(
        [[distance(n.pos, bs), n.msg_len, n.sensed_data] for n in nodes],
        dtype=float,
    )
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)  # population std (ddof=0)
    out = np.zeros_like(raw)
    nz = std > 0
    out[:, nz] = (raw[:, nz] - mean[nz]) / std[nz]
    return out


@dataclass
class KmeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia_history: list[float] = field(default_factory=list)


def kmeans(features: np.ndarray, k: int, rng: RngStream,
           max_iter: int = 100) -> KmeansResult:
    """Lloyd's algorithm with deterministic seeded initialization.

    Init picks k distinct data points uniformly at random. Runs until the
    assignment stops changing or max_iter is hit. An empty cluster is
    reseeded from the point currently farthest from its assigned centroid.
    inertia_history records the within-cluster sum of squares once per
    assignment step (non-increasing).
    """
    features = np.asarray(features, dtype=float)
    n = features.shape[0]
    if k < 1 or k > n:
        raise ConfigError(f"k must be in [1, {n}], got {k}")
    idx = rng.choice(n, size=k, replace=False)
    centroids = features[idx].copy()
    labels = np.full(n, -1)
    history: list[float] = []
    for _ in range(max_iter):
        d2 = ((features[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        for c in range(k):
            if not (new_labels == c).any():
                far = int(d2[np.arange(n), new_labels].argmax())
                centroids[c] = features[far]
                new_labels[far] = c
                d2[:, c] = ((features - centroids[c]) ** 2).sum(axis=1)
        history.append(float(d2[np.arange(n), new_labels].sum()))
        if (new_labels == labels).all():
            break
        labels = new_labels
        for c in range(k):
            centroids[c] = features[labels == c].mean(axis=0)
    return KmeansResult(labels=labels, centroids=centroids, inertia_history=history)


@dataclass
class GmmModel:
    """Mixture with one covariance matrix shared across all components."""

    n_components: int
    mixture_coeffs: np.ndarray
    means: np.ndarray
    covariance: np.ndarray


@dataclass
class GmmResult:
    model: GmmModel
    labels: np.ndarray
    responsibilities: np.ndarray
    loglik_history: list[float] = field(default_factory=list)


def gmm_fit(features: np.ndarray, n_components: int, rng: RngStream,
            max_iter: int = 200, tol: float = 1e-6,
            reg: float = 1e-6) -> GmmResult:
    """EM for a shared-covariance Gaussian mixture.

    Means initialize from n_components distinct data points (seeded); the
    covariance initializes from the population covariance. Iterates until the
    log-likelihood improvement falls below tol or max_iter is reached. The
    shared covariance gets reg added to its diagonal after every M-step.
    Labels are argmax responsibilities. The iteration loop is compiled
    (_kernels.gmm_em) because simulations re-cluster every round.
    """
    features = np.asarray(features, dtype=float)
    n, d = features.shape
    k = n_components
    if k < 1 or k > n:
        raise ConfigError(f"n_components must be in [1, {n}], got {k}")
    idx = rng.choice(n, size=k, replace=False)
    means = features[idx].copy()
    diff0 = features - features.mean(axis=0)
    cov = (diff0.T @ diff0) / n + reg * np.eye(d)
    pis = np.full(k, 1.0 / k)

    resp, hist, count = _kernels.gmm_em(features, means, cov, pis,
                                        max_iter, tol, reg)
    history = [float(v) for v in hist[:count]]
    labels = resp.argmax(axis=1)
    model = GmmModel(n_components=k, mixture_coeffs=pis, means=means, covariance=cov)
    return GmmResult(model=model, labels=labels, responsibilities=resp,
                     loglik_history=history)


@dataclass
class ClusterAssignment:
    """Round clustering outcome: node id -> cluster index, cluster -> head id."""

    labels: dict[int, int]
    heads: dict[int, int]
    method: str


def elect_heads(nodes: list[NodeState], labels, rng: RngStream | None = None) -> dict[int, int]:
    """Elect one head per cluster: maximum residual energy, ties broken by
    lowest node id.

    When an rng is given and every member of a cluster holds exactly the same
    energy (the first round, typically), the head is drawn uniformly at random
    from that cluster instead.
    """
    clusters: dict[int, list[NodeState]] = {}
    for node, lab in zip(nodes, labels):
        clusters.setdefault(int(lab), []).append(node)
    heads: dict[int, int] = {}
    for c in sorted(clusters):
        members = clusters[c]
        if not members:
            raise RuntimeError(f"cluster {c} has no members")
        energies = [m.energy for m in members]
        if rng is not None and len(members) > 1 and len(set(energies)) == 1:
            head = members[int(rng.integers(0, len(members)))]
        else:
            head = min(members, key=lambda m: (-m.energy, m.id))
        heads[c] = head.id
    return heads
