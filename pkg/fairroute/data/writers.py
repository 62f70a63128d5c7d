"""CSV writers for graphs, request streams and experiment results"""

import csv
import logging
import math
import os
from abc import ABC, abstractmethod
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

from ..errors import DataFormatError, WritingError
from ..metrics.report import MetricsReport
from ..world.entities import CustomerRequest
from ..world.graph import RoadGraph
from .loaders import EDGES_FILE, NODES_FILE, ParkingLoader, TaxiLoader, read_csv_rows

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_value(value: Any) -> str:
    """Text form of a cell; floats keep their shortest round-trip repr"""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


class AbstractCsvWriter(ABC):
    """Abstract base class for CSV writers"""

    @property
    @abstractmethod
    def columns(self) -> List[str]:
        """Header row"""
        pass

    @property
    @abstractmethod
    def format_name(self) -> str:
        """Get human-readable format name"""
        pass

    @abstractmethod
    def rows(self, items: Sequence[Any]) -> Iterable[Sequence[Any]]:
        """Cell values for each item, in column order"""
        pass

    def ensure_output_directory(self, output_path: PathLike) -> None:
        """Ensure output directory exists

        Raises:
            WritingError: If directory cannot be created
        """
        try:
            Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise WritingError(f"Failed to create output directory: {e}") from e

    def write(self, items: Sequence[Any], output_path: PathLike, append: bool = False) -> None:
        """Write a header (unless appending to a non-empty file) and one row per item"""
        output_path = Path(output_path)
        has_content = append and output_path.exists() and output_path.stat().st_size > 0
        with open(output_path, 'a' if append else 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            if not has_content:
                writer.writerow(self.columns)
            for row in self.rows(items):
                writer.writerow([format_value(value) for value in row])

    def write_safely(self, items: Sequence[Any], output_path: PathLike, append: bool = False) -> None:
        """Write rows with error handling and logging

        Raises:
            WritingError: If writing fails
        """
        logger.info(f"Writing {len(items)} {self.format_name} rows to {output_path}")

        try:
            self.ensure_output_directory(output_path)
            self.write(items, output_path, append)

            if not os.path.exists(output_path):
                raise WritingError(f"Output file was not created: {output_path}")

            file_size = os.path.getsize(output_path)
            logger.debug(f"Successfully wrote {output_path} ({file_size} bytes)")

        except Exception as e:
            if isinstance(e, WritingError):
                raise
            raise WritingError(f"Failed to write {output_path}: {e}") from e


class NodeWriter(AbstractCsvWriter):

    @property
    def columns(self) -> List[str]:
        return ['node_id', 'lat', 'lon']

    @property
    def format_name(self) -> str:
        return "node"

    def rows(self, items):
        return items


class EdgeWriter(AbstractCsvWriter):

    @property
    def columns(self) -> List[str]:
        return ['from', 'to', 'length_m']

    @property
    def format_name(self) -> str:
        return "edge"

    def rows(self, items):
        return items


class ParkingWriter(AbstractCsvWriter):
    """Violations in the parking loader schema

    Locations are written as the node coordinates, so loading snaps every row
    back onto the same node. The arrival column repeats the violation time.
    """

    def __init__(self, graph: RoadGraph):
        self.graph = graph

    @property
    def columns(self) -> List[str]:
        return ParkingLoader().required_columns

    @property
    def format_name(self) -> str:
        return "parking"

    def rows(self, items):
        for request in items:
            lat, lon = self.graph.coords(request.destination)
            area = request.source_area or str(request.destination)
            yield [
                area, lat, lon,
                request.window_start, request.window_start, request.window_end,
                request.marker,
            ]


class TaxiWriter(AbstractCsvWriter):
    """Ride requests in the taxi loader schema"""

    def __init__(self, graph: RoadGraph):
        self.graph = graph

    @property
    def columns(self) -> List[str]:
        return TaxiLoader().required_columns

    @property
    def format_name(self) -> str:
        return "taxi"

    def rows(self, items):
        for request in items:
            pickup = self.graph.coords(request.location)
            dropoff = self.graph.coords(request.destination)
            yield [request.window_start, pickup[0], pickup[1], dropoff[0], dropoff[1]]


@dataclass(frozen=True)
class ResultRow:
    """One experiment cell run: its identity and headline metrics"""

    algo: str
    scenario: str
    providers: int
    seed: int
    total_utility: float
    provider_fairness: float
    customer_fairness: float
    total_distance: float

    @classmethod
    def from_report(cls, algo: str, providers: int, seed: int, report: MetricsReport) -> 'ResultRow':
        return cls(
            algo=algo,
            scenario=report.scenario,
            providers=providers,
            seed=seed,
            total_utility=float(report.total_utility),
            provider_fairness=float(report.provider_fairness),
            customer_fairness=float(report.customer_fairness),
            total_distance=float(report.total_distance_m),
        )

    @property
    def sort_key(self):
        return (self.scenario, self.algo, self.providers, self.seed)


RESULT_COLUMNS = [f.name for f in fields(ResultRow)]


class ResultsWriter(AbstractCsvWriter):

    @property
    def columns(self) -> List[str]:
        return RESULT_COLUMNS

    @property
    def format_name(self) -> str:
        return "result"

    def rows(self, items):
        return (astuple(row) for row in items)


def write_graph(graph: RoadGraph, directory: PathLike) -> None:
    """Write ``nodes.csv`` and ``edges.csv`` into a directory"""
    directory = Path(directory)
    NodeWriter().write_safely(graph.node_records(), directory / NODES_FILE)
    EdgeWriter().write_safely(graph.edges(), directory / EDGES_FILE)


def write_parking_csv(requests: Sequence[CustomerRequest], graph: RoadGraph, path: PathLike) -> None:
    ParkingWriter(graph).write_safely(list(requests), path)


def write_taxi_csv(requests: Sequence[CustomerRequest], graph: RoadGraph, path: PathLike) -> None:
    TaxiWriter(graph).write_safely(list(requests), path)


def write_requests(
    requests: Sequence[CustomerRequest],
    graph: RoadGraph,
    path: PathLike,
    scenario: str
) -> None:
    """Write a request stream in the schema its scenario loads from"""
    if scenario == "ride_hailing":
        write_taxi_csv(requests, graph, path)
    else:
        write_parking_csv(requests, graph, path)


def append_results(rows: Sequence[ResultRow], path: PathLike) -> None:
    """Append result rows in canonical (scenario, algo, providers, seed) order"""
    ResultsWriter().write_safely(sorted(rows, key=lambda row: row.sort_key), path, append=True)


def read_results(path: PathLike) -> List[ResultRow]:
    """Load a results file written by :func:`append_results`

    Raises:
        DataFormatError: On missing columns or malformed values
    """
    rows = []
    for line, row in read_csv_rows(path, RESULT_COLUMNS):
        try:
            rows.append(ResultRow(
                algo=row['algo'],
                scenario=row['scenario'],
                providers=int(row['providers']),
                seed=int(row['seed']),
                total_utility=float(row['total_utility']),
                provider_fairness=float(row['provider_fairness']),
                customer_fairness=float(row['customer_fairness']),
                total_distance=float(row['total_distance']),
            ))
        except ValueError as e:
            raise DataFormatError(f"Malformed result row: {e}", path=str(path), line=line) from e
    return rows
