"""Synthetic lattice worlds with Poisson demand"""

import dataclasses
import logging
import math
from typing import List, Tuple

import numpy as np

from ..config import SyntheticParams
from ..metrics.geo import EARTH_RADIUS_M
from ..world.entities import CustomerRequest
from ..world.graph import RoadGraph

logger = logging.getLogger(__name__)

# Demand streams drawn over the same layout
EVALUATION_STREAM = 0
HISTORY_STREAM = 1

_METERS_PER_DEGREE = EARTH_RADIUS_M * math.pi / 180.0


def build_lattice(params: SyntheticParams, speed_m_per_min: float = 70.0) -> RoadGraph:
    """Square lattice with ``spacing_m`` bidirectional edges

    Node ids run row-major from the south-west corner at the origin.
    """
    side = params.lattice_side
    lat_step = params.spacing_m / _METERS_PER_DEGREE
    lon_step = params.spacing_m / (_METERS_PER_DEGREE * math.cos(math.radians(params.origin_lat)))

    nodes = []
    for row in range(side):
        for col in range(side):
            nodes.append((row * side + col, params.origin_lat + row * lat_step, params.origin_lon + col * lon_step))

    edges = []
    for row in range(side):
        for col in range(side):
            node = row * side + col
            if col + 1 < side:
                edges.append((node, node + 1, params.spacing_m))
                edges.append((node + 1, node, params.spacing_m))
            if row + 1 < side:
                edges.append((node, node + side, params.spacing_m))
                edges.append((node + side, node, params.spacing_m))

    return RoadGraph(nodes, edges, speed_m_per_min=speed_m_per_min)


def _poisson_arrivals(rng: np.random.Generator, rate_per_hour: float, horizon: float) -> List[float]:
    """Arrival minutes of a Poisson process on [0, horizon)"""
    mean_gap = 60.0 / rate_per_hour
    arrivals = []
    t = rng.exponential(mean_gap)
    while t < horizon:
        arrivals.append(t)
        t += rng.exponential(mean_gap)
    return arrivals


def _finalize(requests: List[CustomerRequest]) -> List[CustomerRequest]:
    """Sort by (window_start, location) and number the requests in that order"""
    ordered = sorted(requests, key=lambda r: (r.window_start, r.location, r.destination))
    return [dataclasses.replace(request, id=index) for index, request in enumerate(ordered)]


def generate_synthetic(
    params: SyntheticParams,
    speed_m_per_min: float = 70.0,
    stream: int = EVALUATION_STREAM
) -> Tuple[RoadGraph, List[CustomerRequest]]:
    """Non-compliance world: lattice, bays and violation events

    Bays are a sample of lattice nodes seeded by ``params.seed``; ``stream``
    selects an independent demand draw over the same bays. Each bay raises violations as a
    Poisson process at ``poisson_rate`` per hour; every stay lasts an
    exponential time with mean ``exp_mean_stay``. Times are rounded to
    hundredths of a minute.

    Returns:
        (graph, requests sorted by window_start)
    """
    graph = build_lattice(params, speed_m_per_min)
    layout = np.random.default_rng(params.seed)
    rng = np.random.default_rng([params.seed, stream])

    bays = sorted(int(b) for b in layout.choice(graph.node_count, size=params.bays, replace=False))
    requests = []
    for bay in bays:
        for start in _poisson_arrivals(rng, params.poisson_rate, params.horizon):
            stay = rng.exponential(params.exp_mean_stay)
            window_start = round(start, 2)
            requests.append(CustomerRequest(
                id=0,
                destination=bay,
                window_start=window_start,
                window_end=max(window_start, round(start + stay, 2)),
                source_area=str(bay),
                marker="V",
            ))

    requests = _finalize(requests)
    logger.info(f"Generated {len(requests)} violations over {len(bays)} bays ({graph.node_count} nodes)")
    return graph, requests


def generate_ride_hailing(
    params: SyntheticParams,
    speed_m_per_min: float = 70.0,
    stream: int = EVALUATION_STREAM
) -> Tuple[RoadGraph, List[CustomerRequest]]:
    """Ride-hailing world: Poisson requests per origin with uniform destinations

    ``bays`` is read as the number of pickup zones. Requests never expire.
    """
    graph = build_lattice(params, speed_m_per_min)
    layout = np.random.default_rng(params.seed)
    rng = np.random.default_rng([params.seed, stream])
    nodes = graph.nodes

    origins = sorted(int(o) for o in layout.choice(graph.node_count, size=params.bays, replace=False))
    requests = []
    for origin in origins:
        for start in _poisson_arrivals(rng, params.poisson_rate, params.horizon):
            destination = nodes[int(rng.integers(len(nodes)))]
            if destination == origin and len(nodes) > 1:
                destination = nodes[(nodes.index(origin) + 1) % len(nodes)]
            requests.append(CustomerRequest(
                id=0,
                start=origin,
                destination=destination,
                window_start=round(start, 2),
            ))

    requests = _finalize(requests)
    logger.info(f"Generated {len(requests)} ride requests from {len(origins)} zones")
    return graph, requests


def generate_world(
    params: SyntheticParams,
    scenario: str = "non_compliance",
    speed_m_per_min: float = 70.0
) -> Tuple[RoadGraph, List[CustomerRequest], List[CustomerRequest]]:
    """(graph, evaluated requests, demand history) for a scenario

    The history shares the lattice and the bays or zones but draws its own
    demand stream.
    """
    generator = generate_synthetic if scenario == "non_compliance" else generate_ride_hailing
    graph, requests = generator(params, speed_m_per_min)
    _, history = generator(params, speed_m_per_min, stream=HISTORY_STREAM)
    return graph, requests, history
