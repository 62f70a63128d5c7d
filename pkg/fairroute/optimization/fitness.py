"""Projected plan fitness against a frozen world snapshot

Every criterion looks ahead along the decoded routes: the expected capture
probability or ride utility of each target, the providers' ledgers after
those awards, and the per-area customer outcomes they imply.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..metrics.fairness import population_variance
from ..metrics.utility import ride_utility_from
from ..world.entities import CustomerRequest, Scenario
from ..world.graph import RoadGraph, optional_travel_time
from .encoding import AllocationPlan, Chromosome, decode

logger = logging.getLogger(__name__)

CRITERIA = ("utility", "provider_fairness", "customer_fairness", "combined")

# Area used for requests without an area id
_NO_AREA = -1


@dataclass
class WorldSnapshot:
    """Read-only view of the world handed to a dispatch algorithm at one epoch

    ``requests`` is the planning pool (pending requests plus the current
    routes of idle providers). The ``area_*`` maps summarize realized
    outcomes so projections stay longitudinal over the whole horizon.
    """

    scenario: Scenario
    now: float
    graph: RoadGraph
    idle_providers: Tuple[int, ...]
    provider_locations: Dict[int, int]
    requests: Dict[int, CustomerRequest]
    ledgers: Dict[int, float]
    horizon: float = 480.0
    mean_stay: float = 60.0

    # Prospective awards of providers outside the plan (busy ones)
    committed: Dict[int, float] = field(default_factory=dict)

    # Non-compliance: requests raised and captured so far per area
    area_raised: Dict[int, int] = field(default_factory=dict)
    area_captured: Dict[int, float] = field(default_factory=dict)

    # Ride-hailing: realized or estimated waits of requests outside the pool
    area_waits: Dict[int, List[float]] = field(default_factory=dict)

    @property
    def request_ids(self) -> Tuple[int, ...]:
        return tuple(sorted(self.requests))

    def area_of(self, request_id: int) -> int:
        area = self.requests[request_id].area
        return _NO_AREA if area is None else area


def capture_probability(delay: float, mean_stay: float, expired: bool = False) -> float:
    """Chance an exponentially distributed stay outlasts ``delay`` minutes

    Args:
        delay: Minutes until the provider reaches the bay, queue included
        mean_stay: Mean remaining stay of the vehicle
        expired: The vehicle is already known to have left

    Returns:
        exp(-delay / mean_stay), or 0.0 when expired
    """
    if expired:
        return 0.0
    return math.exp(-max(0.0, delay) / mean_stay)


@dataclass(frozen=True)
class Fitness:
    """Projected objectives of one plan"""

    utility: float
    provider_fairness: float
    customer_fairness: float
    total_utility: float

    @property
    def combined(self) -> float:
        return self.total_utility - self.customer_fairness - self.provider_fairness

    def score(self, criterion: str) -> float:
        """Higher is better for every criterion"""
        if criterion == "utility":
            return self.utility
        if criterion == "provider_fairness":
            return -self.provider_fairness
        if criterion == "customer_fairness":
            return -self.customer_fairness
        if criterion == "combined":
            return self.combined
        raise ValueError(f"Unknown criterion: {criterion}")


@dataclass(frozen=True)
class Leg:
    """Projected outcome of visiting one request"""

    request_id: int
    value: float  # capture probability or ride utility
    arrival: float  # minute the provider reaches the request location
    location: int  # provider node after the leg


@dataclass(frozen=True)
class SegmentOutcome:
    """Projected outcome of one provider's ordered route"""

    legs: Tuple[Leg, ...]

    @property
    def total(self) -> float:
        return float(sum(leg.value for leg in self.legs))


class PlanEvaluator:
    """Scores plans against a snapshot, memoizing per-route outcomes"""

    def __init__(self, snapshot: WorldSnapshot):
        self.snapshot = snapshot
        self._segments: Dict[Tuple[int, Tuple[int, ...]], SegmentOutcome] = {}
        self._fitness: Dict[bytes, Fitness] = {}
        self.evaluations = 0

    # Per-leg projections

    def capture_probability(self, request: CustomerRequest, arrival: float) -> float:
        snapshot = self.snapshot
        return capture_probability(
            arrival - snapshot.now,
            snapshot.mean_stay,
            expired=request.window_end < snapshot.now,
        )

    def leg(self, provider_id: int, location: int, t: float, request_id: int, first: bool) -> Leg:
        """Visit ``request_id`` from ``location`` at minute ``t``

        Unreachable targets score 0 and leave the provider in place.
        """
        snapshot = self.snapshot
        graph = snapshot.graph
        request = snapshot.requests[request_id]

        to_target = optional_travel_time(graph, location, request.location)
        if to_target is None:
            return Leg(request_id, 0.0, math.inf, location)
        arrival = t + to_target

        if snapshot.scenario == Scenario.NON_COMPLIANCE:
            return Leg(request_id, self.capture_probability(request, arrival), arrival, request.destination)

        origin = location
        if first and request.assigned_provider == provider_id and request.assigned_location is not None:
            origin = request.assigned_location
        value = ride_utility_from(origin, request, graph)

        to_dropoff = optional_travel_time(graph, request.location, request.destination)
        if to_dropoff is None:
            return Leg(request_id, value, arrival, request.location)
        return Leg(request_id, value, arrival, request.destination)

    def after_leg(self, leg: Leg, location: int, t: float) -> Tuple[int, float]:
        """Provider node and minute once ``leg`` is complete (drop-off included for rides)"""
        if not math.isfinite(leg.arrival):
            return location, t
        snapshot = self.snapshot
        request = snapshot.requests[leg.request_id]
        t = leg.arrival
        if snapshot.scenario == Scenario.RIDE_HAILING and leg.location == request.destination:
            t += snapshot.graph.shortest_travel_time(request.location, request.destination)
        return leg.location, t

    def segment(self, provider_id: int, route: Sequence[int], cache: bool = True) -> SegmentOutcome:
        """Projected legs of one provider's route; ``cache=False`` for one-off hypotheses"""
        key = (provider_id, tuple(route))
        cached = self._segments.get(key)
        if cached is not None:
            return cached

        location = self.snapshot.provider_locations[provider_id]
        t = self.snapshot.now
        legs = []
        for position, request_id in enumerate(route):
            leg = self.leg(provider_id, location, t, request_id, first=position == 0)
            legs.append(leg)
            location, t = self.after_leg(leg, location, t)

        outcome = SegmentOutcome(tuple(legs))
        if cache:
            self._segments[key] = outcome
        return outcome

    def wait_of(self, leg: Leg) -> float:
        """Projected ride-hailing wait of a routed request"""
        snapshot = self.snapshot
        request = snapshot.requests[leg.request_id]
        end = min(leg.arrival, snapshot.horizon) if math.isfinite(leg.arrival) else snapshot.horizon
        return max(0.0, end - request.window_start)

    def unrouted_wait(self, request_id: int) -> float:
        """Wait charged to a pool request no provider is routed to"""
        snapshot = self.snapshot
        return max(0.0, snapshot.horizon - snapshot.requests[request_id].window_start)

    # Whole-plan projections

    def evaluate_routes(self, routes: Mapping[int, Sequence[int]]) -> Fitness:
        """Fitness of explicit routes; requests of the pool not routed stay open"""
        self.evaluations += 1
        snapshot = self.snapshot
        outcomes = {pid: self.segment(pid, routes[pid]) for pid in sorted(routes)}

        legs = [leg for outcome in outcomes.values() for leg in outcome.legs]
        planned_total = float(sum(leg.value for leg in legs))
        pool_size = len(snapshot.requests)
        utility = planned_total / pool_size if pool_size else 0.0

        return Fitness(
            utility=utility,
            provider_fairness=self._provider_variance(outcomes),
            customer_fairness=self._customer_variance(legs),
            total_utility=float(sum(snapshot.ledgers.values())) + planned_total,
        )

    def evaluate_plan(self, plan: AllocationPlan) -> Fitness:
        return self.evaluate_routes(plan.routes)

    def evaluate(self, chromosome: Chromosome) -> Fitness:
        """Fitness of a chromosome, cached by its key vector"""
        key = chromosome.keys.tobytes()
        fitness = self._fitness.get(key)
        if fitness is None:
            fitness = self.evaluate_plan(decode(chromosome))
            self._fitness[key] = fitness
        chromosome.fitness = fitness
        return fitness

    def projected_ledgers(self, outcomes: Mapping[int, SegmentOutcome]) -> Dict[int, float]:
        snapshot = self.snapshot
        ledgers = {
            pid: float(value) + float(snapshot.committed.get(pid, 0.0))
            for pid, value in snapshot.ledgers.items()
        }
        for pid, outcome in outcomes.items():
            ledgers[pid] = ledgers.get(pid, 0.0) + outcome.total
        return ledgers

    def _provider_variance(self, outcomes: Mapping[int, SegmentOutcome]) -> float:
        ledgers = self.projected_ledgers(outcomes)
        return population_variance(ledgers[pid] for pid in sorted(ledgers))

    def _customer_variance(self, legs: Sequence[Leg]) -> float:
        snapshot = self.snapshot

        if snapshot.scenario == Scenario.NON_COMPLIANCE:
            expected: Dict[int, float] = dict(snapshot.area_captured)
            for leg in legs:
                area = snapshot.area_of(leg.request_id)
                expected[area] = expected.get(area, 0.0) + leg.value
            rates = [
                expected.get(area, 0.0) / raised
                for area, raised in sorted(snapshot.area_raised.items())
                if raised > 0
            ]
            return population_variance(rates)

        waits: Dict[int, List[float]] = {area: list(values) for area, values in snapshot.area_waits.items()}
        routed = set()
        for leg in legs:
            routed.add(leg.request_id)
            waits.setdefault(snapshot.area_of(leg.request_id), []).append(self.wait_of(leg))

        for request_id in snapshot.request_ids:
            if request_id not in routed:
                waits.setdefault(snapshot.area_of(request_id), []).append(self.unrouted_wait(request_id))

        return population_variance(float(np.mean(values)) for _, values in sorted(waits.items()) if values)


class RunningVariance:
    """Population variance of a fixed-size collection under value replacement

    Sums are kept around the initial mean to limit cancellation.
    """

    def __init__(self, values: Sequence[float]):
        array = np.asarray(list(values), dtype=float)
        self.count = int(array.size)
        self.offset = float(array.mean()) if self.count else 0.0
        deviations = array - self.offset
        self.total = float(deviations.sum())
        self.squares = float(np.square(deviations).sum())

    def _variance(self, total: float, squares: float) -> float:
        if not self.count:
            return 0.0
        mean = total / self.count
        return max(0.0, squares / self.count - mean * mean)

    @property
    def value(self) -> float:
        return self._variance(self.total, self.squares)

    def _shifted(self, changes: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
        total, squares = self.total, self.squares
        for old, new in changes:
            a, b = old - self.offset, new - self.offset
            total += b - a
            squares += b * b - a * a
        return total, squares

    def with_changes(self, changes: Sequence[Tuple[float, float]]) -> float:
        """Variance after replacing each ``old`` member with ``new``, without committing"""
        return self._variance(*self._shifted(changes))

    def replace(self, changes: Sequence[Tuple[float, float]]) -> None:
        self.total, self.squares = self._shifted(changes)


@dataclass(frozen=True)
class Move:
    """A request placed at the front of a provider's route, with its projected score"""

    request_id: int
    provider_id: int
    score: float
    routes: Dict[int, List[int]]
    outcomes: Dict[int, SegmentOutcome]


class MoveScorer:
    """Scores single-request moves against one fairness criterion

    Only the source and target segments of a move are re-projected; the
    provider or area variance is updated from running sums, so a move costs
    two segment projections instead of a whole-plan evaluation. Scores agree
    with :meth:`PlanEvaluator.evaluate_routes` up to rounding.
    """

    def __init__(self, evaluator: PlanEvaluator, routes: Mapping[int, Sequence[int]], criterion: str):
        if criterion not in ("provider_fairness", "customer_fairness"):
            raise ValueError(f"Moves are scored on a fairness criterion, not {criterion}")
        self.evaluator = evaluator
        self.snapshot = evaluator.snapshot
        self.criterion = criterion

        self.routes: Dict[int, List[int]] = {pid: list(route) for pid, route in routes.items()}
        self.outcomes = {pid: evaluator.segment(pid, route) for pid, route in self.routes.items()}
        self.owner = {rid: pid for pid, route in self.routes.items() for rid in route}

        if criterion == "provider_fairness":
            self._ledgers = evaluator.projected_ledgers(self.outcomes)
            self._variance = RunningVariance(self._ledgers[pid] for pid in sorted(self._ledgers))
        elif self.snapshot.scenario == Scenario.NON_COMPLIANCE:
            self._init_capture_rates()
        else:
            self._init_area_waits()

    def _init_capture_rates(self) -> None:
        snapshot = self.snapshot
        self._expected: Dict[int, float] = dict(snapshot.area_captured)
        for outcome in self.outcomes.values():
            for leg in outcome.legs:
                area = snapshot.area_of(leg.request_id)
                self._expected[area] = self._expected.get(area, 0.0) + leg.value
        self._raised = {area: raised for area, raised in snapshot.area_raised.items() if raised > 0}
        self._variance = RunningVariance(
            self._expected.get(area, 0.0) / raised for area, raised in sorted(self._raised.items())
        )

    def _init_area_waits(self) -> None:
        snapshot = self.snapshot
        evaluator = self.evaluator
        self._waits = {rid: evaluator.unrouted_wait(rid) for rid in snapshot.request_ids}
        for outcome in self.outcomes.values():
            for leg in outcome.legs:
                self._waits[leg.request_id] = evaluator.wait_of(leg)

        self._wait_sum: Dict[int, float] = {}
        self._wait_count: Dict[int, int] = {}
        for area, values in snapshot.area_waits.items():
            self._wait_sum[area] = float(sum(values))
            self._wait_count[area] = len(values)
        for request_id, wait in self._waits.items():
            area = snapshot.area_of(request_id)
            self._wait_sum[area] = self._wait_sum.get(area, 0.0) + wait
            self._wait_count[area] = self._wait_count.get(area, 0) + 1

        self._variance = RunningVariance(
            self._wait_sum[area] / count for area, count in sorted(self._wait_count.items()) if count
        )

    @property
    def score(self) -> float:
        """Current score, higher is better"""
        return -self._variance.value

    def propose(self, request_id: int, provider_id: int) -> Optional[Move]:
        """Score moving ``request_id`` to the front of ``provider_id``'s route

        Returns None when the request already leads that route.
        """
        source = self.owner.get(request_id)
        target_route = self.routes[provider_id]
        if source == provider_id and target_route[0] == request_id:
            return None

        routes: Dict[int, List[int]] = {}
        if source is not None and source != provider_id:
            routes[source] = [rid for rid in self.routes[source] if rid != request_id]
        routes[provider_id] = [request_id] + [rid for rid in target_route if rid != request_id]
        outcomes = {pid: self.evaluator.segment(pid, route, cache=False) for pid, route in routes.items()}

        score = -self._variance.with_changes(self._changes(outcomes))
        return Move(request_id, provider_id, score, routes, outcomes)

    def apply(self, move: Move) -> None:
        """Commit a proposed move"""
        self._variance.replace(self._changes(move.outcomes, commit=True))
        for pid, route in move.routes.items():
            self.routes[pid] = route
            self.outcomes[pid] = move.outcomes[pid]
        self.owner[move.request_id] = move.provider_id

    def _changes(self, outcomes: Mapping[int, SegmentOutcome], commit: bool = False) -> List[Tuple[float, float]]:
        if self.criterion == "provider_fairness":
            return self._ledger_changes(outcomes, commit)
        if self.snapshot.scenario == Scenario.NON_COMPLIANCE:
            return self._capture_rate_changes(outcomes, commit)
        return self._area_wait_changes(outcomes, commit)

    def _ledger_changes(self, outcomes: Mapping[int, SegmentOutcome], commit: bool) -> List[Tuple[float, float]]:
        changes = []
        for pid, outcome in outcomes.items():
            old = self._ledgers[pid]
            new = old - self.outcomes[pid].total + outcome.total
            changes.append((old, new))
            if commit:
                self._ledgers[pid] = new
        return changes

    def _capture_rate_changes(
        self,
        outcomes: Mapping[int, SegmentOutcome],
        commit: bool
    ) -> List[Tuple[float, float]]:
        snapshot = self.snapshot
        delta: Dict[int, float] = {}
        for pid, outcome in outcomes.items():
            for leg in self.outcomes[pid].legs:
                area = snapshot.area_of(leg.request_id)
                delta[area] = delta.get(area, 0.0) - leg.value
            for leg in outcome.legs:
                area = snapshot.area_of(leg.request_id)
                delta[area] = delta.get(area, 0.0) + leg.value

        changes = []
        for area, change in sorted(delta.items()):
            old = self._expected.get(area, 0.0)
            if commit:
                self._expected[area] = old + change
            raised = self._raised.get(area)
            if raised:
                changes.append((old / raised, (old + change) / raised))
        return changes

    def _area_wait_changes(
        self,
        outcomes: Mapping[int, SegmentOutcome],
        commit: bool
    ) -> List[Tuple[float, float]]:
        snapshot = self.snapshot
        waits: Dict[int, float] = {}
        for pid in outcomes:
            for rid in self.routes[pid]:
                waits[rid] = self.evaluator.unrouted_wait(rid)
        for outcome in outcomes.values():
            for leg in outcome.legs:
                waits[leg.request_id] = self.evaluator.wait_of(leg)

        delta: Dict[int, float] = {}
        for rid, wait in waits.items():
            area = snapshot.area_of(rid)
            delta[area] = delta.get(area, 0.0) + wait - self._waits[rid]
            if commit:
                self._waits[rid] = wait

        changes = []
        for area, change in sorted(delta.items()):
            count = self._wait_count[area]
            old = self._wait_sum[area]
            if commit:
                self._wait_sum[area] = old + change
            changes.append((old / count, (old + change) / count))
        return changes


def rank(
    population: Sequence[Chromosome],
    criterion: str,
    evaluator: PlanEvaluator
) -> List[int]:
    """Indices of ``population`` from best to worst under ``criterion``

    Utility ranks descending, fairness ascending by variance; the sort is
    stable so equal scores keep insertion order.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"Unknown criterion: {criterion}")
    scores = [evaluator.evaluate(chromosome).score(criterion) for chromosome in population]
    return sorted(range(len(population)), key=lambda i: -scores[i])
