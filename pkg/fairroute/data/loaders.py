"""CSV ingestion for graphs, parking violations and taxi requests"""

import csv
import logging
import math
from abc import ABC, abstractmethod
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..errors import DataFormatError, GraphError
from ..world.entities import CustomerRequest
from ..world.graph import RoadGraph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

NODES_FILE = "nodes.csv"
EDGES_FILE = "edges.csv"

Row = Tuple[int, Dict[str, str]]


def read_csv_rows(path: PathLike, required: Sequence[str]) -> List[Row]:
    """Rows of a UTF-8 CSV with a header, paired with their 1-based line numbers

    Raises:
        DataFormatError: If the file is unreadable or a required column is missing
    """
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            reader = csv.DictReader(f)
            header = reader.fieldnames or []
            missing = [column for column in required if column not in header]
            if missing:
                raise DataFormatError(f"Missing column(s): {', '.join(missing)}", path=str(path), line=1)
            return [(reader.line_num, dict(row)) for row in reader]
    except UnicodeDecodeError as e:
        raise DataFormatError(f"File is not valid UTF-8: {e}", path=str(path)) from e
    except OSError as e:
        raise DataFormatError(f"Cannot read file: {e}", path=str(path)) from e


def _parse_float(value: str, column: str, path: str, line: int) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as e:
        raise DataFormatError(f"Invalid number in '{column}': {value!r}", path=path, line=line) from e


def _is_number(value: str) -> bool:
    try:
        float(value)
    except (TypeError, ValueError):
        return False
    return True


class TimestampParser:
    """Converts timestamp columns to minutes

    Each column is numeric (minutes since midnight) when every value parses as
    a number, ISO-8601 otherwise. ISO values count minutes from midnight of the
    earliest date among all ISO values of the file.
    """

    def __init__(self, rows: Sequence[Row], columns: Sequence[str], path: str):
        self.path = path
        self.numeric = {
            column: all(_is_number(row.get(column, "")) for _, row in rows)
            for column in columns
        }

        self._origin: Optional[datetime] = None
        parsed = [
            self._parse_iso(row.get(column, ""), column, line)
            for column in columns if not self.numeric[column]
            for line, row in rows
        ]
        if parsed:
            earliest = min(parsed)
            self._origin = earliest.replace(hour=0, minute=0, second=0, microsecond=0)

    def _parse_iso(self, value: str, column: str, line: int) -> datetime:
        try:
            stamp = datetime.fromisoformat(value.strip())
        except (AttributeError, ValueError) as e:
            raise DataFormatError(f"Unparsable timestamp in '{column}': {value!r}", path=self.path, line=line) from e
        return stamp.replace(tzinfo=None)

    def minutes(self, row: Dict[str, str], column: str, line: int) -> float:
        value = row.get(column, "")
        if self.numeric[column]:
            return _parse_float(value, column, self.path, line)
        stamp = self._parse_iso(value, column, line)
        return (stamp - self._origin).total_seconds() / 60.0


class AbstractRequestLoader(ABC):
    """Abstract base class for request stream loaders"""

    @property
    @abstractmethod
    def required_columns(self) -> List[str]:
        """Columns the CSV header must contain"""
        pass

    @property
    @abstractmethod
    def time_columns(self) -> List[str]:
        pass

    @property
    @abstractmethod
    def format_name(self) -> str:
        """Get human-readable format name"""
        pass

    @abstractmethod
    def parse_row(
        self,
        row: Dict[str, str],
        line: int,
        times: TimestampParser,
        graph: RoadGraph
    ) -> CustomerRequest:
        """Build one request (id assigned later) from a CSV row

        Raises:
            DataFormatError: On any invalid field, with the line number
        """
        pass

    def load(self, path: PathLike, graph: RoadGraph) -> List[CustomerRequest]:
        """Load a request stream sorted by window_start

        Ids follow the sorted order; rows with equal start times keep file order.

        Raises:
            DataFormatError: If the file or any row is invalid
        """
        path_str = str(path)
        rows = read_csv_rows(path, self.required_columns)
        times = TimestampParser(rows, self.time_columns, path_str)

        parsed = [(self.parse_row(row, line, times, graph), index) for index, (line, row) in enumerate(rows)]
        parsed.sort(key=lambda item: (item[0].window_start, item[1]))

        requests = []
        for new_id, (request, _) in enumerate(parsed):
            request.id = new_id
            requests.append(request)

        logger.info(f"Loaded {len(requests)} {self.format_name} requests from {Path(path).name}")
        return requests

    def coordinate(self, row: Dict[str, str], column: str, line: int, path: str) -> float:
        value = _parse_float(row.get(column, ""), column, path, line)
        limit = 90.0 if 'lat' in column else 180.0
        if not -limit <= value <= limit:
            raise DataFormatError(f"Coordinate '{column}' out of range: {value}", path=path, line=line)
        return value


class ParkingLoader(AbstractRequestLoader):
    """Parking violations: one capturable request per row"""

    @property
    def required_columns(self) -> List[str]:
        return ['area_id', 'lat', 'lon', 'arrive_time', 'violation_time', 'departure_time', 'marker']

    @property
    def time_columns(self) -> List[str]:
        return ['arrive_time', 'violation_time', 'departure_time']

    @property
    def format_name(self) -> str:
        return "parking"

    def parse_row(self, row, line, times, graph):
        path = times.path
        lat = self.coordinate(row, 'lat', line, path)
        lon = self.coordinate(row, 'lon', line, path)
        times.minutes(row, 'arrive_time', line)
        violation = times.minutes(row, 'violation_time', line)
        departure = times.minutes(row, 'departure_time', line)

        if departure < violation:
            raise DataFormatError(
                f"departure_time {departure} precedes violation_time {violation}", path=path, line=line
            )

        return CustomerRequest(
            id=0,
            destination=graph.nearest_node(lat, lon),
            window_start=violation,
            window_end=departure,
            source_area=row.get('area_id', ''),
            marker=row.get('marker', ''),
        )


class TaxiLoader(AbstractRequestLoader):
    """Taxi requests: pickup and drop-off snapped to nodes, never expiring"""

    @property
    def required_columns(self) -> List[str]:
        return ['request_time', 'pickup_lat', 'pickup_lon', 'dropoff_lat', 'dropoff_lon']

    @property
    def time_columns(self) -> List[str]:
        return ['request_time']

    @property
    def format_name(self) -> str:
        return "taxi"

    def parse_row(self, row, line, times, graph):
        path = times.path
        min_lat, min_lon, max_lat, max_lon = graph.bounding_box()

        snapped = []
        for prefix in ('pickup', 'dropoff'):
            lat = self.coordinate(row, f'{prefix}_lat', line, path)
            lon = self.coordinate(row, f'{prefix}_lon', line, path)
            if not (min_lat <= lat <= max_lat and min_lon <= lon <= max_lon):
                raise DataFormatError(
                    f"{prefix} ({lat}, {lon}) lies outside the graph bounding box", path=path, line=line
                )
            snapped.append(graph.nearest_node(lat, lon))

        return CustomerRequest(
            id=0,
            start=snapped[0],
            destination=snapped[1],
            window_start=times.minutes(row, 'request_time', line),
            window_end=math.inf,
        )


def load_parking_csv(path: PathLike, graph: RoadGraph) -> List[CustomerRequest]:
    return ParkingLoader().load(path, graph)


def load_taxi_csv(path: PathLike, graph: RoadGraph) -> List[CustomerRequest]:
    return TaxiLoader().load(path, graph)


def get_loader_for_scenario(scenario: str) -> AbstractRequestLoader:
    """Loader matching a scenario name

    Raises:
        DataFormatError: If the scenario has no loader
    """
    loaders = {'non_compliance': ParkingLoader, 'ride_hailing': TaxiLoader}
    try:
        return loaders[scenario]()
    except KeyError as e:
        raise DataFormatError(f"No loader for scenario '{scenario}'") from e


def load_requests(path: PathLike, graph: RoadGraph, scenario: str) -> List[CustomerRequest]:
    return get_loader_for_scenario(scenario).load(path, graph)


def load_graph(directory: PathLike, speed_m_per_min: float = 70.0) -> RoadGraph:
    """Load ``nodes.csv`` (node_id,lat,lon) and ``edges.csv`` (from,to,length_m)

    Raises:
        DataFormatError: On unreadable files or invalid rows
    """
    directory = Path(directory)
    nodes_path, edges_path = directory / NODES_FILE, directory / EDGES_FILE

    nodes = []
    for line, row in read_csv_rows(nodes_path, ['node_id', 'lat', 'lon']):
        node_id = _parse_float(row['node_id'], 'node_id', str(nodes_path), line)
        if not node_id.is_integer():
            raise DataFormatError(f"node_id must be an integer: {row['node_id']!r}", path=str(nodes_path), line=line)
        nodes.append((
            int(node_id),
            _parse_float(row['lat'], 'lat', str(nodes_path), line),
            _parse_float(row['lon'], 'lon', str(nodes_path), line),
        ))

    edges = []
    for line, row in read_csv_rows(edges_path, ['from', 'to', 'length_m']):
        edges.append((
            int(_parse_float(row['from'], 'from', str(edges_path), line)),
            int(_parse_float(row['to'], 'to', str(edges_path), line)),
            _parse_float(row['length_m'], 'length_m', str(edges_path), line),
        ))

    try:
        graph = RoadGraph(nodes, edges, speed_m_per_min=speed_m_per_min)
    except GraphError as e:
        raise DataFormatError(f"Invalid graph: {e}", path=str(directory)) from e

    logger.info(f"Loaded graph from {directory}: {graph.node_count} nodes")
    return graph
