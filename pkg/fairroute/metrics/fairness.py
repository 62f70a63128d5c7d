"""Area partitioning and the two-sided fairness variances"""

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import MetricsError
from ..world.entities import CustomerRequest, Scenario
from .utility import AwardEvent

if TYPE_CHECKING:
    from ..world.graph import RoadGraph

logger = logging.getLogger(__name__)

BoundingBox = Tuple[float, float, float, float]


def population_variance(values: Iterable[float]) -> float:
    """Variance dividing by the count; 0.0 for an empty input"""
    array = np.asarray(list(values), dtype=float)
    if array.size == 0:
        return 0.0
    return float(np.var(array))


@dataclass
class AreaPartition:
    """Uniform lat/lon grid over a bounding box

    Area ids are ``row * cols + col`` with row 0 at the minimum latitude.
    Points on the maximum edge fall into the last row/column.
    """

    rows: int
    cols: int
    bounding_box: BoundingBox
    node_areas: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise MetricsError(f"Area grid must be at least 1x1, got {self.rows}x{self.cols}")
        min_lat, min_lon, max_lat, max_lon = self.bounding_box
        if min_lat > max_lat or min_lon > max_lon:
            raise MetricsError(f"Invalid bounding box {self.bounding_box}")

    @classmethod
    def from_graph(cls, graph: "RoadGraph", rows: int = 4, cols: int = 4) -> 'AreaPartition':
        """Grid over the graph bounding box with every node pre-mapped"""
        partition = cls(rows=rows, cols=cols, bounding_box=graph.bounding_box())
        for node_id, lat, lon in graph.node_records():
            partition.node_areas[node_id] = partition.area_of(lat, lon)
        return partition

    @property
    def area_count(self) -> int:
        return self.rows * self.cols

    @staticmethod
    def _cell(value: float, low: float, high: float, cells: int) -> int:
        span = high - low
        if span <= 0:
            return 0
        index = int(math.floor((value - low) / span * cells))
        return min(max(index, 0), cells - 1)

    def area_of(self, lat: float, lon: float) -> int:
        min_lat, min_lon, max_lat, max_lon = self.bounding_box
        row = self._cell(lat, min_lat, max_lat, self.rows)
        col = self._cell(lon, min_lon, max_lon, self.cols)
        return row * self.cols + col

    def area_of_node(self, node_id: int) -> int:
        try:
            return self.node_areas[node_id]
        except KeyError as e:
            raise MetricsError(f"Node {node_id} is not mapped to an area") from e

    def assign_areas(self, requests: Iterable[CustomerRequest]) -> None:
        """Set ``request.area`` from the request's first location (bay or pickup)"""
        for request in requests:
            request.area = self.area_of_node(request.location)


def provider_fairness(per_provider_utility: Mapping[int, float]) -> float:
    """Population variance of the providers' accumulated utilities

    Raises:
        MetricsError: If no providers are given
    """
    if not per_provider_utility:
        raise MetricsError("Provider fairness needs at least one provider")
    return population_variance(per_provider_utility[key] for key in sorted(per_provider_utility))


def _request_area(request: CustomerRequest, partition: Optional[AreaPartition]) -> int:
    if request.area is not None:
        return request.area
    if partition is None:
        raise MetricsError(f"Request {request.id} has no area and no partition was given")
    return partition.area_of_node(request.location)


def capture_counts(
    requests: Sequence[CustomerRequest],
    events: Iterable[AwardEvent],
    partition: Optional[AreaPartition] = None
) -> Dict[int, Tuple[int, int]]:
    """Per area: (captures, requests raised); only areas with raised requests appear"""
    area_by_request = {request.id: _request_area(request, partition) for request in requests}

    raised: Dict[int, int] = {}
    for area in area_by_request.values():
        raised[area] = raised.get(area, 0) + 1

    captured: Dict[int, int] = {area: 0 for area in raised}
    for event in events:
        if event.value > 0 and event.request_id in area_by_request:
            area = area_by_request[event.request_id]
            captured[area] += 1

    return {area: (captured[area], raised[area]) for area in sorted(raised)}


def mean_waits(
    requests: Sequence[CustomerRequest],
    horizon: float,
    partition: Optional[AreaPartition] = None
) -> Dict[int, float]:
    """Per area mean waiting time; requests never picked up wait until the horizon"""
    waits: Dict[int, List[float]] = {}
    for request in requests:
        if request.wait is not None:
            wait = request.wait
        else:
            wait = max(0.0, horizon - request.window_start)
        waits.setdefault(_request_area(request, partition), []).append(wait)

    return {area: float(np.mean(values)) for area, values in sorted(waits.items())}


def area_statistics(
    scenario: Scenario,
    requests: Sequence[CustomerRequest],
    events: Iterable[AwardEvent],
    horizon: float = 0.0,
    partition: Optional[AreaPartition] = None
) -> Dict[int, float]:
    """Per-area statistic: capture rate or mean waiting time"""
    if scenario == Scenario.NON_COMPLIANCE:
        return {
            area: captured / raised
            for area, (captured, raised) in capture_counts(requests, events, partition).items()
        }
    return mean_waits(requests, horizon, partition)


def customer_fairness(
    scenario: Scenario,
    partition: Optional[AreaPartition],
    requests: Sequence[CustomerRequest],
    events: Iterable[AwardEvent],
    horizon: float = 0.0
) -> float:
    """Variance over areas of capture rate (non-compliance) or mean wait (ride-hailing)

    Areas that raised no requests are left out.
    """
    stats = area_statistics(scenario, requests, events, horizon, partition)
    return population_variance(stats.values())


def customer_fairness_raw(
    scenario: Scenario,
    partition: Optional[AreaPartition],
    requests: Sequence[CustomerRequest],
    events: Iterable[AwardEvent],
    horizon: float = 0.0
) -> float:
    """Variance over areas of raw capture counts

    Ride-hailing has a single waiting-time definition, so this equals
    :func:`customer_fairness` for that scenario.
    """
    if scenario == Scenario.RIDE_HAILING:
        return customer_fairness(scenario, partition, requests, events, horizon)
    counts = capture_counts(requests, events, partition)
    return population_variance(captured for captured, _ in counts.values())
