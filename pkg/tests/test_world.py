"""Tests for the road graph, entities and provider movement"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairroute.config import SyntheticParams
from fairroute.data.synthetic import build_lattice
from fairroute.errors import GraphError, SimulationError, UnreachableError
from fairroute.world.entities import RequestStatus, ServiceProvider, SimulationClock
from fairroute.world.graph import RoadGraph, optional_travel_time, shortest_travel_time
from fairroute.world.movement import advance_provider
from tests.helpers import ORIGIN_LAT, ORIGIN_LON, line_graph_of, violation

LATTICE = build_lattice(SyntheticParams(bays=1, extent_m=400.0, spacing_m=100.0))
LATTICE_NODES = LATTICE.nodes


class TestRoadGraph:
    """Test graph construction and shortest paths"""

    def test_same_node_is_zero(self, line_graph):
        """A node is zero minutes from itself"""
        assert line_graph.shortest_travel_time(2, 2) == 0.0
        assert line_graph.shortest_path(2, 2) == [2]

    def test_single_edge_travel_time(self):
        """A 700 m edge at 70 m/min takes 10 minutes"""
        graph = RoadGraph([(0, ORIGIN_LAT, ORIGIN_LON), (1, ORIGIN_LAT + 0.01, ORIGIN_LON)], [(0, 1, 700.0)])
        assert shortest_travel_time(graph, 0, 1) == pytest.approx(10.0)

    def test_diamond_shortest_path(self, diamond_graph):
        """Dijkstra agrees with every simple path enumerated by hand"""
        candidates = {
            (0, 1, 3): 500.0,
            (0, 2, 3): 400.0,
            (0, 1, 2, 3): 250.0,
        }
        assert diamond_graph.shortest_distance(0, 3) == pytest.approx(min(candidates.values()))
        assert diamond_graph.shortest_path(0, 3) == [0, 1, 2, 3]
        assert diamond_graph.shortest_travel_time(0, 3) == pytest.approx(250.0 / 70.0)

    def test_directed_edges(self, diamond_graph):
        """Edges are one-way"""
        with pytest.raises(UnreachableError) as info:
            diamond_graph.shortest_distance(3, 0)
        assert info.value.source == 3
        assert info.value.target == 0
        assert not diamond_graph.is_reachable(3, 0)
        assert optional_travel_time(diamond_graph, 3, 0) is None

    def test_unknown_node(self, line_graph):
        with pytest.raises(GraphError):
            line_graph.shortest_distance(0, 99)

    @pytest.mark.parametrize("edges", [
        [(0, 5, 10.0)],
        [(0, 1, 0.0)],
        [(0, 1, -3.0)],
    ])
    def test_invalid_edges(self, edges):
        """Dangling endpoints and non-positive lengths are rejected"""
        nodes = [(0, ORIGIN_LAT, ORIGIN_LON), (1, ORIGIN_LAT + 0.001, ORIGIN_LON)]
        with pytest.raises(GraphError):
            RoadGraph(nodes, edges)

    def test_duplicate_node(self):
        with pytest.raises(GraphError, match="Duplicate"):
            RoadGraph([(0, 0.0, 0.0), (0, 1.0, 1.0)], [])

    def test_out_of_range_coordinates(self):
        with pytest.raises(GraphError):
            RoadGraph([(0, 91.0, 0.0)], [])

    def test_nearest_node_ties_to_lowest_id(self):
        """Two nodes on the same coordinate resolve to the lower id"""
        graph = RoadGraph([(7, 1.0, 1.0), (3, 1.0, 1.0), (5, 2.0, 2.0)], [])
        assert graph.nearest_node(1.0, 1.0) == 3
        assert graph.nearest_node(1.9, 1.9) == 5

    def test_bounding_box(self, line_graph):
        min_lat, min_lon, max_lat, max_lon = line_graph.bounding_box()
        assert min_lat == pytest.approx(ORIGIN_LAT)
        assert min_lon == max_lon == pytest.approx(ORIGIN_LON)
        assert max_lat > min_lat

    def test_validate_reachability(self, diamond_graph):
        diamond_graph.validate_reachability([0], [1, 2, 3])
        with pytest.raises(UnreachableError):
            diamond_graph.validate_reachability([0, 3], [1])

    def test_records_round_trip(self, diamond_graph):
        rebuilt = RoadGraph(diamond_graph.node_records(), diamond_graph.edges())
        assert rebuilt.node_records() == diamond_graph.node_records()
        assert rebuilt.edges() == diamond_graph.edges()

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.sampled_from(LATTICE_NODES),
        b=st.sampled_from(LATTICE_NODES),
        c=st.sampled_from(LATTICE_NODES),
    )
    def test_triangle_inequality(self, a, b, c):
        """Shortest travel times satisfy the triangle inequality"""
        direct = LATTICE.shortest_travel_time(a, c)
        via = LATTICE.shortest_travel_time(a, b) + LATTICE.shortest_travel_time(b, c)
        assert direct <= via + 1e-9

    @settings(max_examples=30, deadline=None)
    @given(a=st.sampled_from(LATTICE_NODES), b=st.sampled_from(LATTICE_NODES))
    def test_path_length_matches_distance(self, a, b):
        """Summing edges along the returned path gives the shortest distance"""
        path = LATTICE.shortest_path(a, b)
        assert path[0] == a and path[-1] == b
        length = sum(LATTICE.edge_length(u, v) for u, v in zip(path, path[1:]))
        assert length == pytest.approx(LATTICE.shortest_distance(a, b))


class TestEntities:
    """Test request and provider state"""

    def test_window_order_enforced(self):
        with pytest.raises(SimulationError):
            violation(1, 0, start=5.0, end=4.0)

    def test_zero_width_window_allowed(self):
        request = violation(1, 0, start=5.0, end=5.0)
        assert request.in_window(5.0)
        assert not request.in_window(5.1)

    def test_location_prefers_pickup(self):
        request = violation(1, 4)
        assert request.location == 4
        request.start = 2
        assert request.location == 2

    def test_status_transitions(self):
        """Served and expired are terminal"""
        request = violation(1, 0)
        request.assign_to(0, 3)
        request.transition(RequestStatus.SERVED)
        assert not request.is_open
        with pytest.raises(SimulationError):
            request.transition(RequestStatus.PENDING)

    def test_pending_cannot_be_served(self):
        request = violation(1, 0)
        with pytest.raises(SimulationError):
            request.transition(RequestStatus.SERVED)

    def test_assignment_location_resets_on_provider_change(self):
        request = violation(1, 0)
        request.assign_to(0, 3)
        request.assign_to(0, 5)
        assert request.assigned_location == 3
        request.assign_to(1, 5)
        assert request.assigned_provider == 1
        assert request.assigned_location == 5
        request.release()
        assert request.status == RequestStatus.PENDING
        assert request.assigned_provider is None

    def test_duplicate_route_rejected(self):
        provider = ServiceProvider(id=0, location=0)
        with pytest.raises(SimulationError):
            provider.instruct([1, 1], 2, [0, 1, 2])

    def test_instruct_at_node(self):
        provider = ServiceProvider(id=0, location=0)
        assert provider.instruct([4], 2, [0, 1, 2])
        assert provider.path == [1, 2]
        assert not provider.is_idle

    def test_clock(self):
        clock = SimulationClock(horizon=2)
        assert clock.tick() == 1
        assert clock.tick() == 2
        assert clock.finished
        with pytest.raises(SimulationError):
            clock.tick()

    def test_clock_rejects_bad_horizon(self):
        with pytest.raises(SimulationError):
            SimulationClock(horizon=0)


class TestMovement:
    """Test one-minute provider advancement"""

    def test_idle_provider_stays(self, line_graph):
        provider = ServiceProvider(id=0, location=1)
        result = advance_provider(provider, line_graph)
        assert result.distance_m == 0.0
        assert provider.location == 1

    def test_one_edge_per_minute(self, line_graph):
        """At 70 m/min a provider crosses one 70 m edge and arrives"""
        provider = ServiceProvider(id=0, location=0)
        provider.instruct([5], 1, line_graph.shortest_path(0, 1))
        result = advance_provider(provider, line_graph)
        assert result.arrived
        assert result.distance_m == pytest.approx(70.0)
        assert provider.location == 1
        assert provider.has_arrived

    def test_speed_bound(self, line_graph):
        """Three edges take three steps and never more than 70 m each"""
        provider = ServiceProvider(id=0, location=0)
        provider.instruct([5], 3, line_graph.shortest_path(0, 3))
        steps = []
        while not provider.has_arrived:
            steps.append(advance_provider(provider, line_graph).distance_m)
        assert len(steps) == 3
        assert all(step <= 70.0 + 1e-9 for step in steps)
        assert provider.distance_m == pytest.approx(sum(steps))

    def test_deferred_instruction_applies_at_next_node(self):
        """A re-route received mid-edge waits for the next node"""
        graph = line_graph_of(3, spacing_m=105.0)
        provider = ServiceProvider(id=0, location=0)
        provider.instruct([1], 2, graph.shortest_path(0, 2))

        advance_provider(provider, graph)
        assert not provider.is_at_node
        assert provider.position_progress == pytest.approx(70.0)

        assert provider.instruct([9], 0, graph.shortest_path(0, 0)) is False
        assert provider.route == [1]

        result = advance_provider(provider, graph)
        assert result.nodes_reached == [1]
        assert provider.location == 1
        assert provider.route == [9]
        assert provider.target_node == 0
        assert provider.position_progress == pytest.approx(35.0)
        assert provider.distance_m == pytest.approx(140.0)

    def test_movement_conserves_distance(self, lattice):
        """Distance on the ledger equals the shortest path length once arrived"""
        provider = ServiceProvider(id=0, location=lattice.nodes[0])
        target = lattice.nodes[-1]
        provider.instruct([1], target, lattice.shortest_path(provider.location, target))
        for _ in range(100):
            if provider.has_arrived:
                break
            advance_provider(provider, lattice)
        assert provider.location == target
        assert provider.distance_m == pytest.approx(lattice.shortest_distance(lattice.nodes[0], target))
        assert math.isfinite(provider.distance_m)
