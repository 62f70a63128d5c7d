"""Directed road graph with cached shortest-path travel times"""

import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..errors import GraphError, UnreachableError
from ..metrics.geo import haversine_vectorized

logger = logging.getLogger(__name__)

DEFAULT_SPEED_M_PER_MIN = 70.0

NodeRecord = Tuple[int, float, float]
EdgeRecord = Tuple[int, int, float]


class RoadGraph:
    """Geographic directed graph; every travel time in a run derives from it

    Nodes carry (lat, lon) in degrees, edges a length in meters. Shortest
    paths are computed with Dijkstra from each origin on first use and
    memoized for the lifetime of the graph.
    """

    def __init__(
        self,
        nodes: Iterable[NodeRecord],
        edges: Iterable[EdgeRecord],
        speed_m_per_min: float = DEFAULT_SPEED_M_PER_MIN
    ):
        """Build and validate the graph

        Args:
            nodes: (node_id, latitude, longitude) records
            edges: (from, to, length_m) records
            speed_m_per_min: Constant travel speed

        Raises:
            GraphError: On duplicate nodes, dangling endpoints or non-positive lengths
        """
        if speed_m_per_min <= 0:
            raise GraphError("Travel speed must be positive")

        self.speed = speed_m_per_min
        self._graph = nx.DiGraph()

        for node_id, lat, lon in nodes:
            node_id = int(node_id)
            if node_id in self._graph:
                raise GraphError(f"Duplicate node id {node_id}")
            if not -90.0 <= lat <= 90.0 or not -180.0 <= lon <= 180.0:
                raise GraphError(f"Node {node_id} has out-of-range coordinates ({lat}, {lon})")
            self._graph.add_node(node_id, lat=float(lat), lon=float(lon))

        for source, target, length in edges:
            source, target = int(source), int(target)
            if source not in self._graph or target not in self._graph:
                raise GraphError(f"Edge ({source}, {target}) references an undeclared node")
            if not length > 0:
                raise GraphError(f"Edge ({source}, {target}) has non-positive length {length}")
            self._graph.add_edge(source, target, length=float(length))

        self._node_ids = np.array(sorted(self._graph.nodes), dtype=np.int64)
        self._lats = np.array([self._graph.nodes[n]['lat'] for n in self._node_ids])
        self._lons = np.array([self._graph.nodes[n]['lon'] for n in self._node_ids])

        # origin -> (distances, paths)
        self._cache: Dict[int, Tuple[Dict[int, float], Dict[int, List[int]]]] = {}

        logger.debug(
            f"RoadGraph built: {self._graph.number_of_nodes()} nodes, "
            f"{self._graph.number_of_edges()} edges"
        )

    @property
    def nodes(self) -> List[int]:
        """Node ids in ascending order"""
        return [int(n) for n in self._node_ids]

    @property
    def node_count(self) -> int:
        return len(self._node_ids)

    def has_node(self, node_id: int) -> bool:
        return node_id in self._graph

    def coords(self, node_id: int) -> Tuple[float, float]:
        """(lat, lon) of a node"""
        self._require(node_id)
        data = self._graph.nodes[node_id]
        return data['lat'], data['lon']

    def edges(self) -> List[EdgeRecord]:
        """All edges as (from, to, length_m), sorted"""
        return sorted(
            (int(u), int(v), float(d['length'])) for u, v, d in self._graph.edges(data=True)
        )

    def node_records(self) -> List[NodeRecord]:
        """All nodes as (node_id, lat, lon), sorted by id"""
        return [(int(n), float(la), float(lo)) for n, la, lo in zip(self._node_ids, self._lats, self._lons)]

    def edge_length(self, source: int, target: int) -> float:
        """Length of a single directed edge in meters

        Raises:
            GraphError: If the edge does not exist
        """
        try:
            return self._graph.edges[source, target]['length']
        except KeyError as e:
            raise GraphError(f"No edge from {source} to {target}") from e

    def bounding_box(self) -> Tuple[float, float, float, float]:
        """(min_lat, min_lon, max_lat, max_lon) over all nodes"""
        if not len(self._node_ids):
            raise GraphError("Graph has no nodes")
        return (
            float(self._lats.min()), float(self._lons.min()),
            float(self._lats.max()), float(self._lons.max()),
        )

    def nearest_node(self, lat: float, lon: float) -> int:
        """Node closest to a coordinate by Haversine distance

        Ties resolve to the lowest node id.
        """
        if not len(self._node_ids):
            raise GraphError("Graph has no nodes")
        distances = haversine_vectorized(lat, lon, self._lats, self._lons)
        # argmin returns the first minimum, node ids are sorted ascending
        return int(self._node_ids[int(np.argmin(distances))])

    # Shortest paths

    def _require(self, node_id: int) -> None:
        if node_id not in self._graph:
            raise GraphError(f"Unknown node {node_id}")

    def _from_origin(self, source: int) -> Tuple[Dict[int, float], Dict[int, List[int]]]:
        cached = self._cache.get(source)
        if cached is None:
            cached = nx.single_source_dijkstra(self._graph, source, weight='length')
            self._cache[source] = cached
        return cached

    def shortest_distance(self, source: int, target: int) -> float:
        """Shortest directed path length in meters

        Raises:
            GraphError: If either node is unknown
            UnreachableError: If no directed path exists
        """
        self._require(source)
        self._require(target)
        if source == target:
            return 0.0
        distances, _ = self._from_origin(source)
        if target not in distances:
            raise UnreachableError(source, target)
        return float(distances[target])

    def shortest_travel_time(self, source: int, target: int) -> float:
        """Shortest travel time in minutes at the graph's constant speed"""
        return self.shortest_distance(source, target) / self.speed

    def shortest_path(self, source: int, target: int) -> List[int]:
        """Node sequence of a shortest path, both endpoints included"""
        self._require(source)
        self._require(target)
        if source == target:
            return [source]
        _, paths = self._from_origin(source)
        if target not in paths:
            raise UnreachableError(source, target)
        return list(paths[target])

    def is_reachable(self, source: int, target: int) -> bool:
        try:
            self.shortest_distance(source, target)
        except UnreachableError:
            return False
        return True

    def validate_reachability(self, starts: Sequence[int], targets: Sequence[int]) -> None:
        """Check that every target is reachable from every start

        Raises:
            UnreachableError: For the first failing pair
        """
        for start in sorted(set(starts)):
            for target in sorted(set(targets)):
                self.shortest_distance(start, target)


def shortest_travel_time(graph: RoadGraph, source: int, target: int) -> float:
    """Module-level form of RoadGraph.shortest_travel_time"""
    return graph.shortest_travel_time(source, target)


def optional_travel_time(graph: RoadGraph, source: int, target: int) -> Optional[float]:
    """Travel time, or None when the target is unreachable"""
    try:
        return graph.shortest_travel_time(source, target)
    except UnreachableError:
        return None
