"""Myopic one-target-per-provider baselines"""

import logging
import math
from typing import Dict, List, Optional

from ..optimization.encoding import AllocationPlan
from ..optimization.fitness import PlanEvaluator, WorldSnapshot
from ..world.graph import optional_travel_time
from .base import DispatchAlgorithm

logger = logging.getLogger(__name__)


class GreedyDispatcher(DispatchAlgorithm):
    """Each idle provider, in id order, claims the best unclaimed request

    Subclasses define the score (higher is better); equal scores go to the
    lowest request id and unreachable requests are never claimed.
    """

    def _score(self, evaluator: PlanEvaluator, provider_id: int, request_id: int) -> Optional[float]:
        raise NotImplementedError

    def plan(self, snapshot: WorldSnapshot, epoch: int = 0) -> AllocationPlan:
        evaluator = PlanEvaluator(snapshot)
        claimed = set()
        routes: Dict[int, List[int]] = {}

        for provider_id in sorted(snapshot.idle_providers):
            best: Optional[int] = None
            best_score = -math.inf
            for request_id in snapshot.request_ids:
                if request_id in claimed:
                    continue
                score = self._score(evaluator, provider_id, request_id)
                if score is not None and score > best_score:
                    best, best_score = request_id, score

            routes[provider_id] = [best] if best is not None else []
            if best is not None:
                claimed.add(best)

        unassigned = [rid for rid in snapshot.request_ids if rid not in claimed]
        logger.debug(f"{self.name} epoch {epoch}: {len(claimed)} claimed, {len(unassigned)} left")
        return AllocationPlan(routes=routes, unassigned=unassigned)


class GreedyProbabilityDispatcher(GreedyDispatcher):
    """Highest capture probability (non-compliance) or ride utility (ride-hailing)"""

    @property
    def name(self) -> str:
        return "greedy"

    def _score(self, evaluator: PlanEvaluator, provider_id: int, request_id: int) -> Optional[float]:
        snapshot = evaluator.snapshot
        leg = evaluator.leg(
            provider_id, snapshot.provider_locations[provider_id], snapshot.now, request_id, first=True
        )
        if not math.isfinite(leg.arrival):
            return None
        return leg.value


class NearestDispatcher(GreedyDispatcher):
    """Shortest travel time to the request location"""

    @property
    def name(self) -> str:
        return "nearest"

    def _score(self, evaluator: PlanEvaluator, provider_id: int, request_id: int) -> Optional[float]:
        snapshot = evaluator.snapshot
        travel = optional_travel_time(
            snapshot.graph,
            snapshot.provider_locations[provider_id],
            snapshot.requests[request_id].location,
        )
        return None if travel is None else -travel


def greedy_probability_plan(snapshot: WorldSnapshot, epoch: int = 0) -> AllocationPlan:
    return GreedyProbabilityDispatcher().plan(snapshot, epoch)


def nearest_plan(snapshot: WorldSnapshot, epoch: int = 0) -> AllocationPlan:
    return NearestDispatcher().plan(snapshot, epoch)
