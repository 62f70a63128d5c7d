"""Synthetic worlds, dataset loaders and CSV writers"""

from .loaders import (
    AbstractRequestLoader,
    ParkingLoader,
    TaxiLoader,
    get_loader_for_scenario,
    load_graph,
    load_parking_csv,
    load_requests,
    load_taxi_csv,
)
from .synthetic import build_lattice, generate_ride_hailing, generate_synthetic, generate_world
from .writers import (
    RESULT_COLUMNS,
    ResultRow,
    append_results,
    read_results,
    write_graph,
    write_parking_csv,
    write_requests,
    write_taxi_csv,
)

__all__ = [
    "AbstractRequestLoader",
    "ParkingLoader",
    "RESULT_COLUMNS",
    "ResultRow",
    "TaxiLoader",
    "append_results",
    "build_lattice",
    "generate_ride_hailing",
    "generate_synthetic",
    "generate_world",
    "get_loader_for_scenario",
    "load_graph",
    "load_parking_csv",
    "load_requests",
    "load_taxi_csv",
    "read_results",
    "write_graph",
    "write_parking_csv",
    "write_requests",
    "write_taxi_csv",
]
