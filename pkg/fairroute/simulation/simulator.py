"""Rolling-horizon discrete-time simulation"""

import csv
import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..config import ScenarioConfig
from ..dispatch.base import DispatchAlgorithm
from ..errors import DoubleServiceError, GraphError, SimulationError, UnreachableError, WritingError
from ..metrics.fairness import AreaPartition
from ..metrics.report import MetricsReport
from ..metrics.utility import AwardEvent, ride_utility
from ..optimization.encoding import AllocationPlan
from ..optimization.fitness import WorldSnapshot
from ..sampling.placement import Placement, place_providers
from ..world.entities import CustomerRequest, RequestStatus, Scenario, ServiceProvider, SimulationClock
from ..world.graph import RoadGraph, optional_travel_time
from ..world.movement import advance_provider

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['minute', 'provider', 'node', 'cumulative_utility']

TraceRow = Tuple[int, int, int, float]


@dataclass
class SimulationResult:
    """Everything a run produced"""

    report: MetricsReport
    events: List[AwardEvent] = field(default_factory=list)
    trace: List[TraceRow] = field(default_factory=list)
    placement: Placement = field(default_factory=dict)
    providers: List[ServiceProvider] = field(default_factory=list)
    requests: List[CustomerRequest] = field(default_factory=list)
    epochs_planned: int = 0

    def save_trace(self, path: Union[str, Path]) -> None:
        """Write one row per (minute, provider)

        Raises:
            WritingError: If the file cannot be written
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, 'w', encoding='utf-8', newline='') as f:
                writer = csv.writer(f)
                writer.writerow(TRACE_COLUMNS)
                for minute, provider_id, node, utility in self.trace:
                    writer.writerow([minute, provider_id, node, f"{utility:.6f}"])
        except OSError as e:
            raise WritingError(f"Failed to write trace {path}: {e}") from e
        logger.info(f"Trace written to {path}")


def validate_events(events: Sequence[CustomerRequest], graph: RoadGraph, scenario: Scenario) -> None:
    """Reject a malformed request stream before any simulation step

    Raises:
        SimulationError: On unsorted or duplicate requests, unknown nodes or
            requests that do not match the scenario
    """
    seen = set()
    previous = float('-inf')
    for request in events:
        if request.id in seen:
            raise SimulationError(f"Duplicate request id {request.id}")
        seen.add(request.id)

        if request.window_start < previous:
            raise SimulationError(f"Request {request.id} breaks the window_start ordering")
        previous = request.window_start

        if request.status != RequestStatus.PENDING:
            raise SimulationError(f"Request {request.id} is not pending at the start of the run")

        if scenario == Scenario.RIDE_HAILING and request.start is None:
            raise SimulationError(f"Ride request {request.id} has no pickup node")
        if scenario == Scenario.NON_COMPLIANCE and request.start is not None:
            raise SimulationError(f"Non-compliance request {request.id} must not have a pickup node")

        for node in (request.start, request.destination):
            if node is not None and not graph.has_node(node):
                raise SimulationError(f"Request {request.id} references unknown node {node}")


class Simulator:
    """Minute-by-minute simulation binding world, dispatch algorithm and metrics"""

    def __init__(
        self,
        graph: RoadGraph,
        config: ScenarioConfig,
        algorithm: DispatchAlgorithm,
        record_trace: bool = False
    ):
        self.graph = graph
        self.config = config
        self.algorithm = algorithm
        self.record_trace = record_trace
        self.scenario = Scenario(config.scenario)
        self.partition = AreaPartition.from_graph(graph, config.area_rows, config.area_cols)

        self._reset_state()

    def _reset_state(self) -> None:
        self.providers: Dict[int, ServiceProvider] = {}
        self.requests: Dict[int, CustomerRequest] = {}
        self.released: List[int] = []
        self.events: List[AwardEvent] = []
        self.trace: List[TraceRow] = []
        self.area_raised: Dict[int, int] = {}
        self.area_captured: Dict[int, float] = {}
        self.epochs_planned = 0
        self.placement: Placement = {}

    # Public API

    def run(self, events: Sequence[CustomerRequest], placement: Placement) -> SimulationResult:
        """Simulate the whole horizon

        Args:
            events: Requests sorted by window_start (left untouched)
            placement: provider_id -> initial node

        Returns:
            SimulationResult with the metrics report and award log

        Raises:
            SimulationError: If the inputs are malformed
        """
        validate_events(events, self.graph, self.scenario)
        if not placement:
            raise SimulationError("At least one provider is required")

        self._reset_state()
        self.algorithm.reset()
        self.placement = dict(sorted(placement.items()))

        for provider_id, node in sorted(placement.items()):
            if not self.graph.has_node(node):
                raise SimulationError(f"Provider {provider_id} placed on unknown node {node}")
            self.providers[provider_id] = ServiceProvider(id=provider_id, location=node)

        stream = [dataclasses.replace(request) for request in events]
        self.partition.assign_areas(stream)
        self._check_reachability(stream)

        logger.info(
            f"Simulating {self.scenario.value} with {self.algorithm.name}: "
            f"{len(self.providers)} providers, {len(stream)} requests, horizon {self.config.horizon} min"
        )

        clock = SimulationClock(horizon=self.config.horizon)
        cursor = 0
        while True:
            now = clock.now
            cursor = self._release(stream, cursor, now)
            self._expire(now)
            self._serve_arrivals(now)

            if self.record_trace:
                self._record_trace(now)
            if clock.finished:
                break

            if now % self.config.epoch == 0:
                self._replan(now)
                self._serve_arrivals(now)

            for provider_id in sorted(self.providers):
                advance_provider(self.providers[provider_id], self.graph, dt=1.0)
            clock.tick()

        return self._finish(clock.now)

    def serve_request(self, provider: ServiceProvider, request: CustomerRequest, t: float) -> Optional[AwardEvent]:
        """Serve a request the provider is standing on

        Non-compliance: an award of 1 inside the window, otherwise a miss that
        consumes the request. Ride-hailing: the pickup awards the ride utility,
        records the waiting time and puts the customer on board.

        Returns:
            The award event, or None for a miss

        Raises:
            DoubleServiceError: If the request was already served
            SimulationError: If the provider is not at the request location
        """
        if request.status == RequestStatus.SERVED:
            raise DoubleServiceError(f"Request {request.id} was already served by provider {request.served_by}")
        if request.status == RequestStatus.EXPIRED:
            raise SimulationError(f"Request {request.id} has expired")
        if provider.location != request.location or not provider.is_at_node:
            raise SimulationError(f"Provider {provider.id} is not at the location of request {request.id}")

        if self.scenario == Scenario.NON_COMPLIANCE:
            if not request.in_window(t):
                request.transition(RequestStatus.EXPIRED)
                logger.debug(f"t={t}: provider {provider.id} missed request {request.id}")
                return None
            value = 1.0
            wait = None
        else:
            value = ride_utility(provider, request, t, self.graph)
            wait = t - request.window_start
            request.wait = wait
            provider.onboard = request.id
            provider.busy_until = t + self.graph.shortest_travel_time(request.location, request.destination)

        if request.status == RequestStatus.PENDING:
            request.transition(RequestStatus.ASSIGNED)
        request.transition(RequestStatus.SERVED)
        request.served_by = provider.id
        request.served_at = t
        provider.award(value)

        event = AwardEvent(
            provider_id=provider.id, request_id=request.id, t=t, value=value, wait=wait, area=request.area,
        )
        self.events.append(event)
        if self.scenario == Scenario.NON_COMPLIANCE and request.area is not None:
            self.area_captured[request.area] = self.area_captured.get(request.area, 0.0) + 1.0
        return event

    # Step phases

    def _check_reachability(self, stream: Sequence[CustomerRequest]) -> None:
        starts = sorted({p.location for p in self.providers.values()})
        targets = sorted({node for r in stream for node in (r.start, r.destination) if node is not None})
        try:
            self.graph.validate_reachability(starts, targets)
        except UnreachableError as e:
            raise SimulationError(f"Request nodes must be reachable from every provider start: {e}") from e

    def _release(self, stream: List[CustomerRequest], cursor: int, now: int) -> int:
        while cursor < len(stream) and stream[cursor].window_start <= now:
            request = stream[cursor]
            self.requests[request.id] = request
            self.released.append(request.id)
            area = request.area if request.area is not None else -1
            self.area_raised[area] = self.area_raised.get(area, 0) + 1
            cursor += 1
        return cursor

    def _expire(self, now: int) -> None:
        """Non-compliance only: vehicles past their departure time leave"""
        if self.scenario != Scenario.NON_COMPLIANCE:
            return

        expired = 0
        for request_id in self.released:
            request = self.requests[request_id]
            if request.is_open and request.window_end < now:
                request.transition(RequestStatus.EXPIRED)
                expired += 1

        if not expired:
            return
        for provider_id in sorted(self.providers):
            provider = self.providers[provider_id]
            route = self._current_route(provider)
            if any(not self.requests[rid].is_open for rid in route):
                self._retarget(provider, self._open_only(route))

    def _current_route(self, provider: ServiceProvider) -> List[int]:
        """Route the provider will follow, including one deferred until the next node"""
        if provider.pending_instruction is not None:
            return list(provider.pending_instruction[0])
        return list(provider.route)

    def _open_only(self, request_ids: Sequence[int]) -> List[int]:
        return [rid for rid in request_ids if self.requests[rid].is_open]

    def _serve_arrivals(self, now: int) -> None:
        for provider_id in sorted(self.providers):
            provider = self.providers[provider_id]
            while provider.has_arrived and provider.pending_instruction is None:
                if provider.onboard is not None:
                    onboard = self.requests[provider.onboard]
                    if provider.location != onboard.destination:
                        break
                    provider.onboard = None
                    provider.busy_until = float(now)
                    self._retarget(provider, provider.route)
                    continue

                if not provider.route:
                    provider.target_node = None
                    break

                request = self.requests[provider.route[0]]
                if not request.is_open:
                    self._retarget(provider, self._open_only(provider.route))
                    continue
                if provider.location != request.location:
                    break
                self.serve_request(provider, request, float(now))
                self._retarget(provider, provider.route[1:])

    def _retarget(self, provider: ServiceProvider, route: List[int]) -> None:
        """Point the provider at its next stop: on-board drop-off first, then the route head"""
        route = list(route)
        while True:
            if provider.onboard is not None:
                target: Optional[int] = self.requests[provider.onboard].destination
            elif route:
                target = self.requests[route[0]].location
            else:
                target = None

            if target is None:
                provider.instruct(route, None, [])
                return
            try:
                path = self.graph.shortest_path(provider.location, target)
            except UnreachableError:
                if provider.onboard is not None or not route:
                    raise
                dropped = self.requests[route.pop(0)]
                logger.warning(f"Request {dropped.id} unreachable from provider {provider.id}, released")
                dropped.release()
                continue
            provider.instruct(route, target, path)
            return

    def _idle_providers(self) -> List[int]:
        idle = []
        for provider_id in sorted(self.providers):
            provider = self.providers[provider_id]
            if not provider.is_at_node or provider.onboard is not None or provider.pending_instruction is not None:
                continue
            if provider.route and not self.algorithm.replan_at_nodes:
                continue
            idle.append(provider_id)
        return idle

    def _snapshot(self, now: int, idle: List[int], pool: List[int]) -> WorldSnapshot:
        idle_set = set(idle)
        committed: Dict[int, float] = {}
        area_waits: Dict[int, List[float]] = {}

        if self.scenario == Scenario.RIDE_HAILING:
            for provider_id, provider in self.providers.items():
                if provider_id in idle_set:
                    continue
                for request_id in provider.route:
                    request = self.requests[request_id]
                    committed[provider_id] = committed.get(provider_id, 0.0) + ride_utility(
                        provider, request, now, self.graph
                    )

            pool_set = set(pool)
            for request_id in self.released:
                if request_id in pool_set:
                    continue
                request = self.requests[request_id]
                if request.wait is not None:
                    wait = request.wait
                else:
                    holder = self.providers.get(request.assigned_provider) if request.assigned_provider is not None else None
                    travel = optional_travel_time(self.graph, holder.location, request.location) if holder else None
                    wait = now - request.window_start + (travel or 0.0)
                area = request.area if request.area is not None else -1
                area_waits.setdefault(area, []).append(wait)

        return WorldSnapshot(
            scenario=self.scenario,
            now=float(now),
            graph=self.graph,
            idle_providers=tuple(idle),
            provider_locations={pid: p.location for pid, p in self.providers.items()},
            requests={rid: self.requests[rid] for rid in pool},
            ledgers={pid: p.accumulated_utility for pid, p in self.providers.items()},
            horizon=float(self.config.horizon),
            mean_stay=self.config.mean_stay,
            committed=committed,
            area_raised=dict(self.area_raised),
            area_captured=dict(self.area_captured),
            area_waits=area_waits,
        )

    def _replan(self, now: int) -> None:
        idle = self._idle_providers()
        if not idle:
            return

        held = self._open_only([rid for pid in idle for rid in self.providers[pid].route])
        pending = [
            rid for rid in self.released if self.requests[rid].status == RequestStatus.PENDING
        ]
        pool = sorted(set(pending) | set(held))
        if not pool:
            return

        snapshot = self._snapshot(now, idle, pool)
        plan = self.algorithm.plan(snapshot, epoch=now)
        self._check_plan(plan, idle, pool)
        self._apply_plan(plan, idle, held)
        self.epochs_planned += 1

        logger.debug(
            f"t={now}: {self.algorithm.name} planned {len(plan.assigned)} of {len(pool)} requests "
            f"for {len(idle)} idle providers"
        )

    def _check_plan(self, plan: AllocationPlan, idle: List[int], pool: List[int]) -> None:
        plan.validate()
        unknown_providers = set(plan.routes) - set(idle)
        if unknown_providers:
            raise SimulationError(f"Plan routes non-idle providers {sorted(unknown_providers)}")
        unknown_requests = set(plan.assigned) - set(pool)
        if unknown_requests:
            raise SimulationError(f"Plan assigns requests outside the pool {sorted(unknown_requests)}")

    def _apply_plan(self, plan: AllocationPlan, idle: List[int], held: List[int]) -> None:
        planned = set(plan.assigned)
        for request_id in held:
            if request_id not in planned and self.requests[request_id].is_open:
                self.requests[request_id].release()

        for provider_id in idle:
            provider = self.providers[provider_id]
            route = list(plan.routes.get(provider_id, []))
            origin = provider.location
            for request_id in route:
                request = self.requests[request_id]
                request.assign_to(provider_id, origin)
                origin = request.destination
            self._retarget(provider, route)

    def _record_trace(self, now: int) -> None:
        for provider_id in sorted(self.providers):
            provider = self.providers[provider_id]
            self.trace.append((now, provider_id, provider.location, provider.accumulated_utility))

    def _finish(self, horizon: int) -> SimulationResult:
        released = [self.requests[rid] for rid in self.released]
        providers = [self.providers[pid] for pid in sorted(self.providers)]
        report = MetricsReport.compute(
            scenario=self.scenario,
            ledgers={p.id: p.accumulated_utility for p in providers},
            requests=released,
            events=self.events,
            total_distance_m=sum(p.distance_m for p in providers),
            horizon=horizon,
            partition=self.partition,
        )
        logger.info(
            f"Run finished: utility {report.total_utility:.2f}, provider var {report.provider_fairness:.4f}, "
            f"customer var {report.customer_fairness:.4f}, distance {report.total_distance_m:.0f} m"
        )
        return SimulationResult(
            report=report,
            events=list(self.events),
            trace=list(self.trace),
            placement=dict(self.placement),
            providers=providers,
            requests=released,
            epochs_planned=self.epochs_planned,
        )


def run_simulation(
    config: ScenarioConfig,
    algorithm: DispatchAlgorithm,
    events: Sequence[CustomerRequest],
    graph: RoadGraph,
    placement: Optional[Placement] = None,
    history: Optional[Sequence[CustomerRequest]] = None,
    record_trace: bool = False
) -> SimulationResult:
    """Place providers (unless a placement is given) and simulate the horizon

    The placement mode is the scenario's, or the algorithm's default when the
    scenario leaves it unset. Clustered placement learns from ``history``.
    """
    if placement is None:
        mode = config.placement or algorithm.default_placement
        try:
            placement = place_providers(
                mode,
                config.providers,
                graph,
                seed=config.seed,
                history=history,
                area_count=config.area_rows * config.area_cols,
                start_node=config.start_node,
                k=config.cluster_k,
                tau=config.cluster_tau,
            )
        except GraphError as e:
            raise SimulationError(f"Provider placement failed: {e}") from e

    return Simulator(graph, config, algorithm, record_trace).run(events, placement)
