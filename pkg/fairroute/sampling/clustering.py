"""Constrained K-means with a minimum cluster size

The assignment step is a transportation problem solved exactly with a
min-cost flow: every point supplies its demand in units, every cluster needs at least
``tau`` units and a sink absorbs the rest.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..errors import ClusteringError
from ..metrics.geo import EARTH_RADIUS_M

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 100
DEFAULT_N_INIT = 5

# Squared distances are scaled to integers for the network simplex
_COST_SCALE = 1e9


@dataclass
class ClusterModel:
    """Result of a constrained K-means run"""

    k: int
    tau: int
    centroids: List[Tuple[float, float]]
    assignment: List[int]
    demand_weight: List[float]
    objective: float = 0.0
    objective_history: List[float] = field(default_factory=list)
    iterations: int = 0

    @property
    def sizes(self) -> List[int]:
        counts = np.bincount(np.asarray(self.assignment, dtype=np.int64), minlength=self.k)
        return [int(c) for c in counts]


class LocalProjection:
    """Local equirectangular projection to meters around the point mean"""

    def __init__(self, latlon: np.ndarray):
        self.lat0 = float(latlon[:, 0].mean())
        self.lon0 = float(latlon[:, 1].mean())
        self.kx = EARTH_RADIUS_M * np.cos(np.radians(self.lat0)) * np.pi / 180.0
        self.ky = EARTH_RADIUS_M * np.pi / 180.0

    def forward(self, latlon: np.ndarray) -> np.ndarray:
        x = (latlon[:, 1] - self.lon0) * self.kx
        y = (latlon[:, 0] - self.lat0) * self.ky
        return np.column_stack([x, y])

    def inverse(self, xy: np.ndarray) -> np.ndarray:
        lat = xy[:, 1] / self.ky + self.lat0
        lon = xy[:, 0] / self.kx + self.lon0 if self.kx else np.full(len(xy), self.lon0)
        return np.column_stack([lat, lon])


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum('ijk,ijk->ij', diff, diff)


def clustering_objective(points: np.ndarray, centroids: np.ndarray, assignment: np.ndarray) -> float:
    """Sum over points of half the squared distance to their cluster centroid"""
    diff = points - centroids[assignment]
    return float(0.5 * np.einsum('ij,ij->', diff, diff))


def constrained_transport(
    points: np.ndarray,
    centroids: np.ndarray,
    tau: int,
    weights: Optional[np.ndarray] = None
) -> np.ndarray:
    """Optimal split of point demand over centroids with at least ``tau`` units each

    Point ``i`` supplies ``weights[i]`` units (one by default), so a weighted
    point behaves like that many coincident points and may be split.

    Returns:
        (m, k) integer matrix of units sent from each point to each cluster

    Raises:
        ClusteringError: If the size constraint cannot be met
    """
    m, k = len(points), len(centroids)
    supply = np.ones(m, dtype=np.int64) if weights is None else np.asarray(weights, dtype=np.int64)
    total = int(supply.sum())
    if k * tau > total:
        raise ClusteringError(f"Infeasible constraint: k={k} clusters of at least {tau} from {total} units")

    d2 = _squared_distances(points, centroids)
    peak = float(d2.max()) if d2.size else 0.0
    scaled = np.rint(d2 / peak * _COST_SCALE).astype(np.int64) if peak > 0 else np.zeros_like(d2, dtype=np.int64)
    # Lexicographic tie-break on the cluster index
    costs = scaled * k + np.arange(k, dtype=np.int64)[None, :]

    sink = m + k
    flow_graph = nx.DiGraph()
    for i in range(m):
        flow_graph.add_node(i, demand=-int(supply[i]))
    for h in range(k):
        flow_graph.add_node(m + h, demand=tau)
        flow_graph.add_edge(m + h, sink, weight=0)
    flow_graph.add_node(sink, demand=total - k * tau)

    for i in range(m):
        if supply[i] <= 0:
            continue
        for h in range(k):
            flow_graph.add_edge(i, m + h, weight=int(costs[i, h]), capacity=int(supply[i]))

    try:
        flow = nx.min_cost_flow(flow_graph)
    except nx.NetworkXUnfeasible as e:
        raise ClusteringError(f"Constrained assignment is infeasible: {e}") from e

    transport = np.zeros((m, k), dtype=np.int64)
    for i in range(m):
        for target, units in flow[i].items():
            transport[i, target - m] = units
    return transport


def _labels(points: np.ndarray, centroids: np.ndarray, transport: np.ndarray) -> np.ndarray:
    """Cluster carrying most of each point's units; nearest centroid for empty points"""
    labels = np.argmax(transport, axis=1)
    empty = transport.sum(axis=1) == 0
    if empty.any():
        labels[empty] = np.argmin(_squared_distances(points[empty], centroids), axis=1)
    return labels


def constrained_assignment(points: np.ndarray, centroids: np.ndarray, tau: int) -> np.ndarray:
    """Optimal assignment of points to centroids with at least ``tau`` points each

    Equal costs resolve to the lowest cluster index.

    Raises:
        ClusteringError: If the size constraint cannot be met
    """
    if len(centroids) * tau > len(points):
        raise ClusteringError(
            f"Infeasible constraint: k={len(centroids)} clusters of at least {tau} from {len(points)} points"
        )
    return _labels(points, centroids, constrained_transport(points, centroids, tau))


def transport_objective(points: np.ndarray, centroids: np.ndarray, transport: np.ndarray) -> float:
    """Half squared distances to the centroids, weighted by the units sent"""
    return float(0.5 * np.sum(transport * _squared_distances(points, centroids)))


def _update_centroids(points: np.ndarray, transport: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    updated = centroids.copy()
    loads = transport.sum(axis=0)
    for h in range(len(centroids)):
        if loads[h] > 0:
            updated[h] = np.average(points, axis=0, weights=transport[:, h])
    return updated


def _single_run(
    points: np.ndarray,
    weights: np.ndarray,
    k: int,
    tau: int,
    rng: np.random.Generator,
    max_iter: int
) -> Tuple[np.ndarray, np.ndarray, List[float], int]:
    if np.all(weights == weights[0]):
        seeds = rng.choice(len(points), size=k, replace=False)
    else:
        seeds = rng.choice(len(points), size=k, replace=False, p=weights / weights.sum())
    centroids = points[np.sort(seeds)].astype(float)

    transport = constrained_transport(points, centroids, tau, weights)
    centroids = _update_centroids(points, transport, centroids)
    history = [transport_objective(points, centroids, transport)]

    iterations = 1
    while iterations < max_iter:
        candidate = constrained_transport(points, centroids, tau, weights)
        if np.array_equal(candidate, transport):
            break
        # Integer cost rounding must never make the objective worse
        if transport_objective(points, centroids, candidate) > transport_objective(points, centroids, transport):
            break
        transport = candidate
        centroids = _update_centroids(points, transport, centroids)
        history.append(transport_objective(points, centroids, transport))
        iterations += 1

    return centroids, transport, history, iterations


def constrained_kmeans(
    points: Sequence[Tuple[float, float]],
    k: int,
    tau: int,
    seed: int = 0,
    weights: Optional[Sequence[float]] = None,
    n_init: int = DEFAULT_N_INIT,
    max_iter: int = MAX_ITERATIONS
) -> ClusterModel:
    """Cluster lat/lon points into ``k`` groups of at least ``tau`` demand units

    Points are projected to local planar meters; the objective is the sum of
    half squared distances to the assigned centroid, each point counted
    ``weights[i]`` times. Clustering distinct locations with their request
    counts is therefore the same as clustering one point per request. Each of
    ``n_init`` seeded restarts iterates until the assignment is stable or
    ``max_iter`` is hit, and the lowest objective wins.

    Args:
        points: (lat, lon) pairs
        k: Number of clusters
        tau: Minimum demand units per cluster
        seed: Random seed for centroid initialization
        weights: Non-negative integer demand of each point (defaults to 1 each)
        n_init: Number of restarts
        max_iter: Iteration cap per restart

    Returns:
        ClusterModel with lat/lon centroids and per-cluster demand

    Raises:
        ClusteringError: If k < 1, tau < 0, the weights are not counts or
            k * tau exceeds the total demand
    """
    latlon = np.asarray(points, dtype=float).reshape(-1, 2)
    m = len(latlon)

    if weights is None:
        point_weights = np.ones(m, dtype=np.int64)
    else:
        raw = np.asarray(weights, dtype=float)
        if raw.shape != (m,):
            raise ClusteringError(f"Expected {m} weights, got {raw.shape}")
        if np.any(raw < 0) or not np.allclose(raw, np.rint(raw)):
            raise ClusteringError("Weights must be non-negative request counts")
        point_weights = np.rint(raw).astype(np.int64)
    total = int(point_weights.sum())

    if k < 1:
        raise ClusteringError(f"k must be at least 1, got {k}")
    if tau < 0:
        raise ClusteringError(f"tau cannot be negative, got {tau}")
    if k > int(np.count_nonzero(point_weights)) or k * tau > total:
        raise ClusteringError(f"Infeasible clustering: k={k}, tau={tau} with {m} points and demand {total}")
    if n_init < 1:
        raise ClusteringError("n_init must be at least 1")

    projection = LocalProjection(latlon)
    xy = projection.forward(latlon)
    rng = np.random.default_rng(seed)

    best: Optional[Tuple[np.ndarray, np.ndarray, List[float], int]] = None
    for restart in range(n_init):
        run = _single_run(xy, point_weights, k, tau, rng, max_iter)
        logger.debug(f"Restart {restart}: objective {run[2][-1]:.2f} after {run[3]} iterations")
        if best is None or run[2][-1] < best[2][-1]:
            best = run

    centroids_xy, transport, history, iterations = best
    centroids = projection.inverse(centroids_xy)
    demand = transport.sum(axis=0)

    model = ClusterModel(
        k=k,
        tau=tau,
        centroids=[(float(lat), float(lon)) for lat, lon in centroids],
        assignment=[int(a) for a in _labels(xy, centroids_xy, transport)],
        demand_weight=[float(d) for d in demand],
        objective=history[-1],
        objective_history=history,
        iterations=iterations,
    )
    logger.info(
        f"Constrained K-means: k={k}, tau={tau}, demand={model.demand_weight}, objective={model.objective:.1f}"
    )
    return model
