"""Initial provider placement: clustered, random or fixed"""

import json
import logging
import math
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import ClusteringError, ConfigurationError, DataFormatError, WritingError
from ..world.entities import CustomerRequest
from ..world.graph import RoadGraph
from .clustering import ClusterModel, constrained_kmeans

logger = logging.getLogger(__name__)

Placement = Dict[int, int]


def largest_remainder(weights: Sequence[float], total: int) -> List[int]:
    """Split ``total`` proportionally to ``weights`` with integer counts

    Floors are topped up by descending fractional remainder; equal remainders
    go to the lower index. All-zero weights are treated as equal.
    """
    if total < 0:
        raise ValueError("total cannot be negative")
    if not weights:
        return []

    values = np.asarray(weights, dtype=float)
    if values.sum() <= 0:
        values = np.ones(len(values))

    quotas = values / values.sum() * total
    counts = np.floor(quotas).astype(int)
    remainders = quotas - counts

    missing = total - int(counts.sum())
    order = sorted(range(len(values)), key=lambda h: (-remainders[h], h))
    for h in order[:missing]:
        counts[h] += 1

    return [int(c) for c in counts]


def distribute_providers(model: ClusterModel, num_providers: int, graph: RoadGraph) -> List[Tuple[int, int]]:
    """Allot providers to cluster centroids proportionally to their demand

    Returns:
        One (node_id, count) per cluster in cluster order; node_id is the graph
        node nearest to the centroid and counts sum to ``num_providers``
    """
    if num_providers < 1:
        raise ClusteringError("At least one provider is required")

    counts = largest_remainder(model.demand_weight, num_providers)
    nodes = [graph.nearest_node(lat, lon) for lat, lon in model.centroids]

    logger.debug(f"Provider distribution over {model.k} clusters: {counts}")
    return list(zip(nodes, counts))


def demand_points(
    graph: RoadGraph,
    history: Iterable[CustomerRequest]
) -> Tuple[List[Tuple[float, float]], List[int]]:
    """Distinct request locations of a demand history with their request counts

    Clustering these with the counts as weights equals clustering one point
    per historical request.
    """
    counter = Counter(request.location for request in history)
    nodes = sorted(counter)
    return [graph.coords(node) for node in nodes], [counter[node] for node in nodes]


def default_cluster_shape(
    num_providers: int,
    area_count: int,
    point_count: int,
    demand: Optional[int] = None
) -> Tuple[int, int]:
    """k = min(providers, areas, points) and tau = ceil(demand / 2k)

    ``demand`` is the number of requests behind the points (one per point by default).
    """
    k = max(1, min(num_providers, area_count, point_count))
    tau = math.ceil((point_count if demand is None else demand) / (2 * k))
    return k, tau


def clustered_placement(
    num_providers: int,
    graph: RoadGraph,
    history: Sequence[CustomerRequest],
    area_count: int,
    seed: int = 0,
    k: Optional[int] = None,
    tau: Optional[int] = None
) -> Placement:
    """Place providers at demand-weighted constrained K-means centroids"""
    points, counts = demand_points(graph, history)
    default_k, default_tau = default_cluster_shape(num_providers, area_count, len(points), demand=sum(counts))
    k = k if k is not None else default_k
    tau = tau if tau is not None else default_tau

    model = constrained_kmeans(points, k, tau, seed=seed, weights=counts)

    placement: Placement = {}
    provider_id = 0
    for node, count in distribute_providers(model, num_providers, graph):
        for _ in range(count):
            placement[provider_id] = node
            provider_id += 1
    return placement


def random_placement(num_providers: int, graph: RoadGraph, seed: int = 0) -> Placement:
    rng = np.random.default_rng(seed)
    nodes = graph.nodes
    picks = rng.integers(0, len(nodes), size=num_providers)
    return {provider_id: nodes[int(i)] for provider_id, i in enumerate(picks)}


def fixed_placement(num_providers: int, graph: RoadGraph, start_node: Optional[int] = None) -> Placement:
    """Every provider starts at ``start_node`` (lowest node id when unset)"""
    node = start_node if start_node is not None else graph.nodes[0]
    if not graph.has_node(node):
        raise ConfigurationError(f"Start node {node} is not in the graph")
    return {provider_id: node for provider_id in range(num_providers)}


def place_providers(
    mode: str,
    num_providers: int,
    graph: RoadGraph,
    seed: int = 0,
    history: Optional[Sequence[CustomerRequest]] = None,
    area_count: int = 16,
    start_node: Optional[int] = None,
    k: Optional[int] = None,
    tau: Optional[int] = None
) -> Placement:
    """Initial node of every provider for the given placement mode

    Args:
        mode: 'clustered', 'random' or 'fixed'
        num_providers: Number of providers
        graph: Road graph
        seed: Seed for clustering initialization or random draws
        history: Demand history feeding the clustered mode
        area_count: Number of customer areas, caps the cluster count
        start_node: Node for the fixed mode
        k: Cluster count override
        tau: Minimum cluster size override

    Returns:
        provider_id -> node_id for ids 0..num_providers-1
    """
    if num_providers < 1:
        raise ConfigurationError("At least one provider is required")

    if mode == 'clustered':
        if not history:
            logger.warning("No demand history for clustered placement, falling back to random")
            return random_placement(num_providers, graph, seed)
        return clustered_placement(num_providers, graph, history, area_count, seed, k, tau)
    if mode == 'random':
        return random_placement(num_providers, graph, seed)
    if mode == 'fixed':
        return fixed_placement(num_providers, graph, start_node)

    raise ConfigurationError(f"Unknown placement mode: {mode}")


def save_placement(placement: Placement, path: Union[str, Path]) -> None:
    """Write provider_id -> node_id as JSON"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        document = {str(pid): int(node) for pid, node in sorted(placement.items())}
        path.write_text(json.dumps(document, indent=2) + "\n", encoding='utf-8')
    except OSError as e:
        raise WritingError(f"Failed to write placement {path}: {e}") from e


def load_placement(path: Union[str, Path]) -> Placement:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
        return {int(pid): int(node) for pid, node in document.items()}
    except (OSError, ValueError, AttributeError) as e:
        raise DataFormatError(f"Invalid placement file: {e}", path=str(path)) from e
