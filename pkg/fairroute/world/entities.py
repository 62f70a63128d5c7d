"""Providers, customer requests and the simulation clock"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from ..errors import SimulationError


class Scenario(Enum):
    """Supported application scenarios"""
    NON_COMPLIANCE = "non_compliance"
    RIDE_HAILING = "ride_hailing"


class RequestStatus(Enum):
    """Lifecycle of a customer request"""
    PENDING = "pending"
    ASSIGNED = "assigned"
    SERVED = "served"
    EXPIRED = "expired"


# Allowed status changes. Status only moves forward except assigned -> pending:
# at each epoch the idle providers' routes are pooled with the pending requests
# and re-planned; a held request the new plan leaves out goes back to pending
# (Simulator._apply_plan).
_TRANSITIONS = {
    RequestStatus.PENDING: {RequestStatus.ASSIGNED, RequestStatus.EXPIRED},
    RequestStatus.ASSIGNED: {
        RequestStatus.ASSIGNED, RequestStatus.PENDING,
        RequestStatus.SERVED, RequestStatus.EXPIRED,
    },
    RequestStatus.SERVED: set(),
    RequestStatus.EXPIRED: set(),
}


@dataclass
class CustomerRequest:
    """A demand event with a validity window

    ``start`` is None in the non-compliance scenario, where only the bay
    (``destination``) matters. ``window_end`` is +inf for ride-hailing.
    """

    id: int
    destination: int
    window_start: float
    window_end: float = math.inf
    start: Optional[int] = None
    area: Optional[int] = None
    status: RequestStatus = RequestStatus.PENDING

    # Ingestion metadata kept for traceability only
    source_area: str = ""
    marker: str = ""

    # Serving record
    served_by: Optional[int] = None
    served_at: Optional[float] = None
    wait: Optional[float] = None

    # Provider currently holding the request and where it was when first assigned
    assigned_provider: Optional[int] = None
    assigned_location: Optional[int] = None

    def __post_init__(self):
        if self.window_start > self.window_end:
            raise SimulationError(
                f"Request {self.id}: window_start {self.window_start} after window_end {self.window_end}"
            )

    @property
    def location(self) -> int:
        """Node a provider must reach first (pickup for rides, bay otherwise)"""
        return self.start if self.start is not None else self.destination

    @property
    def is_open(self) -> bool:
        """Pending or assigned"""
        return self.status in (RequestStatus.PENDING, RequestStatus.ASSIGNED)

    def in_window(self, t: float) -> bool:
        return self.window_start <= t <= self.window_end

    def transition(self, status: RequestStatus) -> None:
        """Move to a new status

        Raises:
            SimulationError: If the change is not an allowed transition
        """
        if status not in _TRANSITIONS[self.status]:
            raise SimulationError(
                f"Request {self.id}: illegal transition {self.status.value} -> {status.value}"
            )
        self.status = status

    def assign_to(self, provider_id: int, location: int) -> None:
        """Mark as assigned; the assignment location resets only on a provider change"""
        if self.assigned_provider != provider_id:
            self.assigned_provider = provider_id
            self.assigned_location = location
        self.transition(RequestStatus.ASSIGNED)

    def release(self) -> None:
        """Return an assigned request to the pending pool"""
        self.assigned_provider = None
        self.assigned_location = None
        self.transition(RequestStatus.PENDING)


@dataclass
class ServiceProvider:
    """A mobile agent (officer or driver) with an accumulated utility ledger

    ``location`` is the last node reached; while travelling along an edge,
    ``position_progress`` holds the meters covered on that edge and
    ``path[0]`` is the node being approached.
    """

    id: int
    location: int
    accumulated_utility: float = 0.0
    route: List[int] = field(default_factory=list)
    # Ride-hailing: expected drop-off minute of the ride on board, then the actual one
    busy_until: float = 0.0
    position_progress: float = 0.0

    # Remaining nodes to the current target, excluding ``location``
    path: List[int] = field(default_factory=list)
    target_node: Optional[int] = None

    # Ride-hailing: request on board between pickup and drop-off
    onboard: Optional[int] = None

    # Instruction received mid-edge, applied at the next node
    pending_instruction: Optional[Tuple[List[int], Optional[int]]] = None

    distance_m: float = 0.0
    awards: int = 0

    @property
    def is_at_node(self) -> bool:
        return self.position_progress == 0.0

    @property
    def is_idle(self) -> bool:
        """No route and nobody on board"""
        return not self.route and self.onboard is None

    @property
    def has_arrived(self) -> bool:
        """Standing on the current target node"""
        return self.target_node is not None and self.is_at_node and not self.path

    def instruct(self, route: List[int], target_node: Optional[int], path: List[int]) -> bool:
        """Give the provider a new route

        Instructions are only accepted at nodes; mid-edge they are stored and
        applied on arrival at the next node.

        Args:
            route: Ordered request ids
            target_node: Node of the route head (None when the route is empty)
            path: Shortest path from ``location`` to ``target_node`` inclusive

        Returns:
            True if applied immediately, False if deferred
        """
        if len(set(route)) != len(route):
            raise SimulationError(f"Provider {self.id}: duplicate request in route {route}")

        if not self.is_at_node:
            self.pending_instruction = (list(route), target_node)
            return False

        self.pending_instruction = None
        self.route = list(route)
        self.target_node = target_node
        self.path = list(path[1:]) if path else []
        return True

    def award(self, value: float) -> None:
        self.accumulated_utility += value
        self.awards += 1


@dataclass
class SimulationClock:
    """Discrete clock advancing one minute per step"""

    horizon: int
    now: int = 0

    def __post_init__(self):
        if self.horizon <= 0:
            raise SimulationError("Horizon must be positive")
        if not 0 <= self.now <= self.horizon:
            raise SimulationError(f"Clock time {self.now} outside [0, {self.horizon}]")

    @property
    def finished(self) -> bool:
        return self.now >= self.horizon

    def tick(self) -> int:
        """Advance by exactly one minute

        Raises:
            SimulationError: If the horizon was already reached
        """
        if self.finished:
            raise SimulationError("Clock already at horizon")
        self.now += 1
        return self.now
