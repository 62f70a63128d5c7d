"""Builders shared by the test modules"""

import math
from typing import Optional

from fairroute.metrics.geo import EARTH_RADIUS_M
from fairroute.world.entities import CustomerRequest
from fairroute.world.graph import RoadGraph

METERS_PER_DEGREE = EARTH_RADIUS_M * math.pi / 180.0

ORIGIN_LAT = -37.8136
ORIGIN_LON = 144.9631


def line_graph_of(count: int, spacing_m: float = 70.0) -> RoadGraph:
    """Nodes 0..count-1 due north of each other, bidirectional edges"""
    step = spacing_m / METERS_PER_DEGREE
    nodes = [(i, ORIGIN_LAT + i * step, ORIGIN_LON) for i in range(count)]
    edges = []
    for i in range(count - 1):
        edges.append((i, i + 1, spacing_m))
        edges.append((i + 1, i, spacing_m))
    return RoadGraph(nodes, edges)


def violation(request_id: int, node: int, start: float = 0.0, end: float = math.inf, area: Optional[int] = None):
    return CustomerRequest(id=request_id, destination=node, window_start=start, window_end=end, area=area)


def ride(request_id: int, pickup: int, dropoff: int, start: float = 0.0, area: Optional[int] = None):
    return CustomerRequest(id=request_id, start=pickup, destination=dropoff, window_start=start, area=area)
