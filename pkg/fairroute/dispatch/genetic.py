"""Genetic dispatchers: 2FairGA, its ablation variants, plain GA and GA(3)"""

import logging
from typing import Dict, Optional

from ..config import GAConfig
from ..optimization.encoding import AllocationPlan, Element
from ..optimization.engine import COMBINED_STAGES, PLAIN_STAGES, FairGAEngine, GAResult, GAStages
from ..optimization.fitness import WorldSnapshot
from .base import DispatchAlgorithm

logger = logging.getLogger(__name__)


class GeneticDispatcher(DispatchAlgorithm):
    """Runs the genetic engine at every epoch, warm-starting from the previous best"""

    replan_at_nodes = True

    def __init__(
        self,
        name: str,
        config: GAConfig,
        stages: GAStages,
        default_placement: str = "random",
        cold_start: bool = False
    ):
        self._name = name
        self.config = config
        self.stages = stages
        self.default_placement = default_placement
        self.cold_start = cold_start

        self.engine = FairGAEngine(config, stages)
        self.last_result: Optional[GAResult] = None
        self._warm: Dict[Element, float] = {}

    @property
    def name(self) -> str:
        return self._name

    def reset(self) -> None:
        self._warm = {}
        self.last_result = None

    def plan(self, snapshot: WorldSnapshot, epoch: int = 0) -> AllocationPlan:
        warm = None if self.cold_start else self._warm
        result = self.engine.run(snapshot, epoch, warm)
        if result.best is not None:
            self._warm = result.warm_keys
        self.last_result = result
        return result.plan


def plain_ga_plan(snapshot: WorldSnapshot, config: GAConfig, epoch: int = 0) -> AllocationPlan:
    """Utility-only genetic algorithm (both fairness stages off)"""
    return FairGAEngine(config, PLAIN_STAGES).run(snapshot, epoch).plan


def ga3_plan(snapshot: WorldSnapshot, config: GAConfig, epoch: int = 0) -> AllocationPlan:
    """Single fitness U - F_customer - F_provider"""
    return FairGAEngine(config, COMBINED_STAGES).run(snapshot, epoch).plan
