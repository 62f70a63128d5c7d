"""Geographic world model for FairRoute"""

from .entities import (
    CustomerRequest,
    RequestStatus,
    Scenario,
    ServiceProvider,
    SimulationClock,
)
from .graph import RoadGraph, shortest_travel_time
from .movement import MovementResult, advance_provider

__all__ = [
    "CustomerRequest",
    "RequestStatus",
    "Scenario",
    "ServiceProvider",
    "SimulationClock",
    "RoadGraph",
    "shortest_travel_time",
    "MovementResult",
    "advance_provider",
]
