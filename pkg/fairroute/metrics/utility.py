"""Per-event utilities and their totals"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional

from ..errors import MetricsError
from ..world.entities import CustomerRequest, Scenario, ServiceProvider
from .geo import haversine

if TYPE_CHECKING:
    from ..world.graph import RoadGraph


@dataclass(frozen=True)
class AwardEvent:
    """One utility award recorded by the simulator"""

    provider_id: int
    request_id: int
    t: float
    value: float
    wait: Optional[float] = None  # ride-hailing only, minutes
    area: Optional[int] = None


def capture_utility(provider: ServiceProvider, request: CustomerRequest, t: float) -> int:
    """1 if the provider stands at the bay while the violation is ongoing, else 0"""
    if request.in_window(t) and provider.location == request.destination:
        return 1
    return 0


def ride_utility_from(location: int, request: CustomerRequest, graph: "RoadGraph") -> float:
    """Trip length minus pickup distance (both great-circle) for a provider at ``location``"""
    if request.start is None:
        raise MetricsError(f"Request {request.id} has no pickup location")

    pickup = graph.coords(request.start)
    dropoff = graph.coords(request.destination)
    here = graph.coords(location)

    return haversine(*dropoff, *pickup) - haversine(*pickup, *here)


def ride_utility(
    provider: ServiceProvider,
    request: CustomerRequest,
    t: float,
    graph: "RoadGraph"
) -> float:
    """Signed ride utility of assigning ``request`` to ``provider`` at time ``t``

    The provider location is the one recorded when the request was assigned
    to this provider, falling back to its current location.
    """
    location = provider.location
    if request.assigned_provider == provider.id and request.assigned_location is not None:
        location = request.assigned_location
    return ride_utility_from(location, request, graph)


def total_utility(events: Iterable[AwardEvent], scenario: Scenario = Scenario.NON_COMPLIANCE) -> float:
    """Sum of awards over providers, time and requests

    Capture events each carry 1; ride events carry their signed utility.
    """
    if scenario == Scenario.NON_COMPLIANCE:
        return float(sum(1 for event in events if event.value > 0))
    return float(sum(event.value for event in events))
