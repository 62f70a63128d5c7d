"""Genetic optimization engine coordinating ranking, reproduction and repair"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import numpy as np

from ..config import GAConfig
from ..errors import OptimizationError
from .encoding import AllocationPlan, Chromosome, Element, decode, encode_random, encode_warm
from .fitness import Fitness, PlanEvaluator, WorldSnapshot, rank
from .operators import assign_provider, crossover, local_optimization, mutate, select_cross_rate
from .statistics import GAStatistics

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GAStages:
    """Switches selecting which parts of the loop run

    With both fairness stages off, the parent pools come from the primary
    ranking, which gives the plain genetic algorithm on the same code path.
    """

    provider_fairness: bool = True
    customer_fairness: bool = True
    primary: str = "utility"  # or "combined"

    def __post_init__(self):
        if self.primary not in ("utility", "combined"):
            raise OptimizationError(f"Unknown primary criterion: {self.primary}")


FULL_STAGES = GAStages()
PLAIN_STAGES = GAStages(provider_fairness=False, customer_fairness=False)
COMBINED_STAGES = GAStages(provider_fairness=False, customer_fairness=False, primary="combined")


@dataclass
class GAResult:
    """Outcome of one optimizer run"""

    plan: AllocationPlan
    best: Optional[Chromosome]
    fitness: Optional[Fitness]
    statistics: GAStatistics

    @property
    def warm_keys(self) -> Dict[Element, float]:
        """Keys of the best chromosome, for warm-starting the next epoch"""
        return self.best.key_map() if self.best is not None else {}


class FairGAEngine:
    """Two-sided fair genetic algorithm over random-keys chromosomes"""

    def __init__(self, config: GAConfig, stages: GAStages = FULL_STAGES):
        """Initialize the engine

        Args:
            config: Population sizes, rates and seed
            stages: Fairness stage switches and primary criterion
        """
        self.config = config
        self.stages = stages

        logger.debug(
            f"FairGAEngine initialized: population={config.population_size}, max_gen={config.max_gen}, "
            f"stages={stages}"
        )

    def run(
        self,
        snapshot: WorldSnapshot,
        epoch: int = 0,
        warm: Optional[Mapping[Element, float]] = None
    ) -> GAResult:
        """Optimize the allocation of the snapshot's pool to its idle providers

        Args:
            snapshot: Frozen world view
            epoch: Re-planning instant, mixed into the seed
            warm: Keys of the previous epoch's best chromosome

        Returns:
            GAResult with the best decoded plan and run statistics

        Raises:
            OptimizationError: If the run fails
        """
        config = self.config
        providers = list(snapshot.idle_providers)
        requests = list(snapshot.request_ids)

        stats = GAStatistics(
            epoch=epoch,
            population_size=config.population_size,
            genome_length=len(providers) + len(requests),
        )

        if not providers:
            return GAResult(AllocationPlan.empty((), requests), None, None, stats)
        if not requests:
            return GAResult(AllocationPlan.empty(providers), None, None, stats)

        stats.start_timing()
        try:
            best, fitness = self._evolve(snapshot, providers, requests, epoch, warm, stats)
        except OptimizationError:
            raise
        except Exception as e:
            logger.error(f"Optimization failed at epoch {epoch}: {e}")
            raise OptimizationError(f"Optimization failed: {e}") from e
        finally:
            stats.stop_timing()

        if config.trace_path:
            stats.save_trace(config.trace_path)

        plan = decode(best)
        logger.debug(
            f"Epoch {epoch}: best utility {fitness.utility:.4f}, provider var {fitness.provider_fairness:.4f}, "
            f"customer var {fitness.customer_fairness:.4f} in {stats.processing_time:.2f}s"
        )
        return GAResult(plan, best, fitness, stats)

    def _initial_population(
        self,
        providers: List[int],
        requests: List[int],
        rng: np.random.Generator,
        warm: Optional[Mapping[Element, float]]
    ) -> List[Chromosome]:
        population = []
        if warm:
            population.append(encode_warm(warm, providers, requests, rng))
        while len(population) < self.config.population_size:
            population.append(encode_random(providers, requests, rng))
        return population

    def _parent_pool(
        self,
        ordered: List[Chromosome],
        fairness_type: str,
        enabled: bool,
        evaluator: PlanEvaluator,
        cache: Dict[bytes, Chromosome],
        stats: GAStatistics
    ) -> List[Chromosome]:
        """Top cross_rate of the fairness-adjusted, fairness-ranked population

        Adjusted chromosomes depend only on their keys, so they are cached
        across generations.
        """
        if not enabled:
            return select_cross_rate(ordered, self.config.cross_rate)

        adjusted = []
        for chromosome in ordered:
            key = chromosome.keys.tobytes()
            transformed = cache.get(key)
            if transformed is None:
                transformed = assign_provider(chromosome, fairness_type, evaluator)
                cache[key] = transformed
                if transformed != chromosome:
                    stats.fairness_moves += 1
            adjusted.append(transformed)

        order = rank(adjusted, f"{fairness_type}_fairness", evaluator)
        return select_cross_rate([adjusted[i] for i in order], self.config.cross_rate)

    def _use_local_optimization(self, rng: np.random.Generator) -> bool:
        draw = rng.random()
        if self.config.local_rule == "literal":
            return draw > self.config.local_rate
        return draw < self.config.local_rate

    def _evolve(
        self,
        snapshot: WorldSnapshot,
        providers: List[int],
        requests: List[int],
        epoch: int,
        warm: Optional[Mapping[Element, float]],
        stats: GAStatistics
    ):
        config = self.config
        stages = self.stages
        primary = stages.primary

        rng = np.random.default_rng([config.seed, epoch])
        evaluator = PlanEvaluator(snapshot)
        provider_cache: Dict[bytes, Chromosome] = {}
        customer_cache: Dict[bytes, Chromosome] = {}

        population = self._initial_population(providers, requests, rng, warm)
        elite_count = min(config.elite_count, config.population_size)
        cross_size = config.population_size - elite_count
        mutated_per_generation = config.population_size - max(elite_count, config.population_size - config.mutate_count)

        for generation in range(config.max_gen):
            order = rank(population, primary, evaluator)
            population = [population[i] for i in order]

            leader = evaluator.evaluate(population[0])
            stats.record_generation(
                generation, leader.score(primary), leader.utility,
                leader.provider_fairness, leader.customer_fairness,
            )
            logger.debug(f"Generation {generation}: best {primary} {leader.score(primary):.6f}")

            mothers = self._parent_pool(
                population, "provider", stages.provider_fairness, evaluator, provider_cache, stats
            )
            fathers = self._parent_pool(
                population, "customer", stages.customer_fairness, evaluator, customer_cache, stats
            )

            children = []
            for _ in range(cross_size):
                mother = mothers[int(rng.integers(len(mothers)))]
                father = fathers[int(rng.integers(len(fathers)))]
                child = crossover(mother, father, rng)
                stats.crossovers += 1

                if self._use_local_optimization(rng):
                    child = local_optimization(child, config.local_window, evaluator)
                    stats.local_optimizations += 1
                children.append(child)

            population = population[:elite_count] + children

            if config.mutate_count:
                order = rank(population, primary, evaluator)
                population = [population[i] for i in order]
                population = mutate(population, config.mutate_rate, rng, elite_count, config.mutation_mode)
                stats.mutations += mutated_per_generation

        order = rank(population, primary, evaluator)
        best = population[order[0]]
        stats.evaluations = evaluator.evaluations
        return best, evaluator.evaluate(best)


def run_fairga(
    snapshot: WorldSnapshot,
    config: GAConfig,
    stages: GAStages = FULL_STAGES,
    epoch: int = 0,
    warm: Optional[Mapping[Element, float]] = None
) -> AllocationPlan:
    """Plan for the snapshot's idle providers; an empty plan when none are idle"""
    return FairGAEngine(config, stages).run(snapshot, epoch, warm).plan
