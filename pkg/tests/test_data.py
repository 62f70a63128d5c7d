"""Tests for synthetic generation, CSV loaders and writers"""

import math

import numpy as np
import pytest

from fairroute.config import SyntheticParams
from fairroute.data import (
    append_results,
    generate_ride_hailing,
    generate_synthetic,
    generate_world,
    get_loader_for_scenario,
    load_graph,
    load_parking_csv,
    load_requests,
    load_taxi_csv,
    read_results,
    write_graph,
    write_parking_csv,
    write_requests,
    write_taxi_csv,
)
from fairroute.data.writers import RESULT_COLUMNS, ResultRow
from fairroute.errors import DataFormatError
from fairroute.metrics.report import MetricsReport
from tests.helpers import ORIGIN_LAT, ORIGIN_LON

PARKING_HEADER = "area_id,lat,lon,arrive_time,violation_time,departure_time,marker\n"
TAXI_HEADER = "request_time,pickup_lat,pickup_lon,dropoff_lat,dropoff_lon\n"


def request_fields(request):
    return (
        request.id, request.start, request.destination, request.window_start,
        request.window_end, request.source_area, request.marker,
    )


@pytest.fixture
def node_coords(line_graph):
    return {node: line_graph.coords(node) for node in line_graph.nodes}


class TestSyntheticGenerator:
    """Test lattice worlds with Poisson demand"""

    def test_lattice_shape(self, small_params, lattice):
        side = small_params.lattice_side
        assert lattice.node_count == side * side
        # 2 directions x 2 axes x side x (side - 1)
        assert len(lattice.edges()) == 4 * side * (side - 1)
        assert lattice.shortest_distance(0, side * side - 1) == pytest.approx(2 * (side - 1) * 100.0)

    def test_seeded_streams_are_identical(self, small_params):
        _, first = generate_synthetic(small_params)
        _, second = generate_synthetic(small_params)
        assert [request_fields(r) for r in first] == [request_fields(r) for r in second]

    def test_stream_is_sorted_and_numbered(self, small_params):
        _, requests = generate_synthetic(small_params)
        assert [r.id for r in requests] == list(range(len(requests)))
        starts = [r.window_start for r in requests]
        assert starts == sorted(starts)
        assert all(r.window_end >= r.window_start for r in requests)
        assert all(0 <= r.window_start < small_params.horizon for r in requests)

    def test_history_shares_bays(self, small_params):
        graph, events, history = generate_world(small_params)
        bays = {r.destination for r in events} | {r.destination for r in history}
        assert len(bays) <= small_params.bays
        assert [request_fields(r) for r in events] != [request_fields(r) for r in history]

    def test_arrival_rate(self):
        """Mean arrivals over 20 seeds within 5% of bays x rate x hours"""
        counts = []
        for seed in range(20):
            params = SyntheticParams(bays=50, extent_m=1000.0, spacing_m=100.0, poisson_rate=0.5,
                                     horizon=480, seed=seed)
            counts.append(len(generate_synthetic(params)[1]))
        assert np.mean(counts) == pytest.approx(50 * 0.5 * 8, rel=0.05)

    def test_mean_stay(self):
        """Mean stay over more than 10^4 violations within 5% of the configured mean"""
        stays = []
        for seed in range(7):
            params = SyntheticParams(bays=100, extent_m=1000.0, spacing_m=100.0, poisson_rate=2.0,
                                     exp_mean_stay=60.0, horizon=480, seed=seed)
            stays.extend(r.window_end - r.window_start for r in generate_synthetic(params)[1])
        assert len(stays) > 10_000
        assert np.mean(stays) == pytest.approx(60.0, rel=0.05)

    def test_ride_hailing_requests(self, small_params):
        _, requests = generate_ride_hailing(small_params)
        assert requests
        for request in requests:
            assert request.start is not None
            assert request.start != request.destination
            assert math.isinf(request.window_end)


class TestParkingLoader:
    """Test parking violation ingestion"""

    def test_fields(self, tmp_path, line_graph, node_coords):
        lat1, lon1 = node_coords[1]
        lat3, lon3 = node_coords[3]
        path = tmp_path / "events.csv"
        path.write_text(
            PARKING_HEADER
            + f"A7,{lat3},{lon3},20,25,40,V\n"
            + f"B2,{lat1 + 1e-6},{lon1},5,5,5,X\n",
            encoding='utf-8',
        )
        requests = load_parking_csv(path, line_graph)

        assert [r.id for r in requests] == [0, 1]
        first, second = requests
        assert (first.destination, first.window_start, first.window_end) == (1, 5.0, 5.0)
        assert (first.source_area, first.marker) == ("B2", "X")
        assert first.start is None
        assert (second.destination, second.window_start, second.window_end) == (3, 25.0, 40.0)

    def test_departure_before_violation(self, tmp_path, line_graph):
        path = tmp_path / "events.csv"
        path.write_text(
            PARKING_HEADER
            + f"A,{ORIGIN_LAT},{ORIGIN_LON},0,1,2,V\n"
            + f"A,{ORIGIN_LAT},{ORIGIN_LON},0,10,4,V\n",
            encoding='utf-8',
        )
        with pytest.raises(DataFormatError) as info:
            load_parking_csv(path, line_graph)
        assert info.value.line == 3
        assert ":3:" in str(info.value)

    def test_missing_column(self, tmp_path, line_graph):
        path = tmp_path / "events.csv"
        path.write_text("area_id,lat,lon\nA,0,0\n", encoding='utf-8')
        with pytest.raises(DataFormatError, match="departure_time"):
            load_parking_csv(path, line_graph)

    def test_bad_number(self, tmp_path, line_graph):
        path = tmp_path / "events.csv"
        path.write_text(PARKING_HEADER + f"A,north,{ORIGIN_LON},0,1,2,V\n", encoding='utf-8')
        with pytest.raises(DataFormatError, match="lat"):
            load_parking_csv(path, line_graph)

    def test_out_of_range_coordinate(self, tmp_path, line_graph):
        path = tmp_path / "events.csv"
        path.write_text(PARKING_HEADER + f"A,95.0,{ORIGIN_LON},0,1,2,V\n", encoding='utf-8')
        with pytest.raises(DataFormatError, match="out of range"):
            load_parking_csv(path, line_graph)

    def test_iso_timestamps(self, tmp_path, line_graph):
        """ISO times count minutes from midnight of the earliest date"""
        path = tmp_path / "events.csv"
        path.write_text(
            PARKING_HEADER
            + f"A,{ORIGIN_LAT},{ORIGIN_LON},2023-05-01T08:00:00,2023-05-01T08:30:00,2023-05-01T09:00:00,V\n"
            + f"A,{ORIGIN_LAT},{ORIGIN_LON},2023-05-02T00:00:00,2023-05-02T00:15:00,2023-05-02T01:00:00,V\n",
            encoding='utf-8',
        )
        requests = load_parking_csv(path, line_graph)
        assert [(r.window_start, r.window_end) for r in requests] == [(510.0, 540.0), (1455.0, 1500.0)]

    def test_not_utf8(self, tmp_path, line_graph):
        path = tmp_path / "events.csv"
        path.write_bytes(PARKING_HEADER.encode('utf-8') + b"\xff\xfe,1,2,3,4,5,V\n")
        with pytest.raises(DataFormatError, match="UTF-8"):
            load_parking_csv(path, line_graph)

    def test_missing_file(self, tmp_path, line_graph):
        with pytest.raises(DataFormatError):
            load_parking_csv(tmp_path / "absent.csv", line_graph)


class TestTaxiLoader:
    """Test taxi request ingestion"""

    def test_fields(self, tmp_path, line_graph, node_coords):
        (lat0, lon0), (lat2, lon2) = node_coords[0], node_coords[2]
        path = tmp_path / "rides.csv"
        path.write_text(TAXI_HEADER + f"12.5,{lat0},{lon0},{lat2},{lon2}\n3,{lat2},{lon2},{lat0},{lon0}\n",
                        encoding='utf-8')
        requests = load_taxi_csv(path, line_graph)

        assert [(r.id, r.start, r.destination, r.window_start) for r in requests] == [(0, 2, 0, 3.0), (1, 0, 2, 12.5)]
        assert all(math.isinf(r.window_end) for r in requests)

    def test_outside_bounding_box(self, tmp_path, line_graph, node_coords):
        lat0, lon0 = node_coords[0]
        path = tmp_path / "rides.csv"
        path.write_text(TAXI_HEADER + f"1,{lat0},{lon0},{lat0 - 0.5},{lon0}\n", encoding='utf-8')
        with pytest.raises(DataFormatError, match="bounding box"):
            load_taxi_csv(path, line_graph)

    def test_scenario_lookup(self, tmp_path, line_graph):
        assert get_loader_for_scenario("ride_hailing").format_name == "taxi"
        assert get_loader_for_scenario("non_compliance").format_name == "parking"
        with pytest.raises(DataFormatError):
            load_requests(tmp_path / "x.csv", line_graph, "delivery")


class TestGraphFiles:
    """Test nodes.csv / edges.csv round trips"""

    def test_round_trip(self, tmp_path, diamond_graph):
        write_graph(diamond_graph, tmp_path / "graph")
        loaded = load_graph(tmp_path / "graph")
        assert loaded.node_records() == diamond_graph.node_records()
        assert loaded.edges() == diamond_graph.edges()

    def test_non_integer_node_id(self, tmp_path):
        (tmp_path / "nodes.csv").write_text("node_id,lat,lon\n1.5,0,0\n", encoding='utf-8')
        (tmp_path / "edges.csv").write_text("from,to,length_m\n", encoding='utf-8')
        with pytest.raises(DataFormatError, match="integer"):
            load_graph(tmp_path)

    def test_invalid_graph(self, tmp_path):
        (tmp_path / "nodes.csv").write_text("node_id,lat,lon\n1,0,0\n", encoding='utf-8')
        (tmp_path / "edges.csv").write_text("from,to,length_m\n1,2,50\n", encoding='utf-8')
        with pytest.raises(DataFormatError, match="Invalid graph"):
            load_graph(tmp_path)


class TestRequestFiles:
    """Test that written request streams load back unchanged"""

    def test_parking_round_trip(self, tmp_path, small_params):
        graph, requests = generate_synthetic(small_params)
        path = tmp_path / "events.csv"
        write_parking_csv(requests, graph, path)
        loaded = load_parking_csv(path, graph)
        assert [request_fields(r) for r in loaded] == [request_fields(r) for r in requests]

    def test_taxi_round_trip(self, tmp_path, small_params):
        graph, requests = generate_ride_hailing(small_params)
        path = tmp_path / "rides.csv"
        write_taxi_csv(requests, graph, path)
        loaded = load_taxi_csv(path, graph)
        assert [(r.id, r.start, r.destination, r.window_start) for r in loaded] == [
            (r.id, r.start, r.destination, r.window_start) for r in requests
        ]

    def test_write_requests_picks_schema(self, tmp_path, small_params):
        graph, requests = generate_ride_hailing(small_params)
        path = tmp_path / "rides.csv"
        write_requests(requests, graph, path, "ride_hailing")
        assert path.read_text(encoding='utf-8').startswith(TAXI_HEADER)


class TestResultsFile:
    """Test the appended results table"""

    @staticmethod
    def row(algo, providers, seed, utility=1.0):
        report = MetricsReport(total_utility=utility, provider_fairness=0.5, customer_fairness=0.25,
                               total_distance_m=700.0)
        return ResultRow.from_report(algo, providers, seed, report)

    def test_header_written_once(self, tmp_path):
        path = tmp_path / "results.csv"
        append_results([self.row("ga", 20, 0)], path)
        append_results([self.row("ga", 20, 1)], path)
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[0] == ",".join(RESULT_COLUMNS)
        assert len(lines) == 3

    def test_canonical_order(self, tmp_path):
        path = tmp_path / "results.csv"
        rows = [self.row("nearest", 20, 0), self.row("2fairga", 30, 1), self.row("2fairga", 20, 2),
                self.row("2fairga", 20, 0)]
        append_results(rows, path)
        assert [(r.algo, r.providers, r.seed) for r in read_results(path)] == [
            ("2fairga", 20, 0), ("2fairga", 20, 2), ("2fairga", 30, 1), ("nearest", 20, 0),
        ]

    def test_round_trip(self, tmp_path):
        path = tmp_path / "results.csv"
        row = self.row("greedy", 50, 2, utility=0.1 + 0.2)
        append_results([row], path)
        assert read_results(path) == [row]

    def test_malformed(self, tmp_path):
        path = tmp_path / "results.csv"
        path.write_text(",".join(RESULT_COLUMNS) + "\nga,non_compliance,many,0,1,0,0,0\n", encoding='utf-8')
        with pytest.raises(DataFormatError):
            read_results(path)
