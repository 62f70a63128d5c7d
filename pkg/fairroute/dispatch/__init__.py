"""Dispatch algorithms and their name registry"""

from typing import Dict, Optional, Tuple

from ..config import GAConfig
from ..errors import ConfigurationError
from ..optimization.engine import COMBINED_STAGES, FULL_STAGES, PLAIN_STAGES, GAStages
from .base import DispatchAlgorithm
from .genetic import GeneticDispatcher, ga3_plan, plain_ga_plan
from .greedy import GreedyProbabilityDispatcher, NearestDispatcher, greedy_probability_plan, nearest_plan

# name -> (stages, default placement)
GENETIC_VARIANTS: Dict[str, Tuple[GAStages, str]] = {
    "2fairga": (FULL_STAGES, "clustered"),
    "ga-cluster-provider-fair": (GAStages(provider_fairness=True, customer_fairness=False), "clustered"),
    "ga-fair": (FULL_STAGES, "random"),
    "ga-provider-fair": (GAStages(provider_fairness=True, customer_fairness=False), "random"),
    "ga-customer-fair": (GAStages(provider_fairness=False, customer_fairness=True), "random"),
    "ga": (PLAIN_STAGES, "random"),
    "ga3": (COMBINED_STAGES, "random"),
}

ALGORITHMS = ("2fairga", "ga", "ga3", "greedy", "nearest") + tuple(
    name for name in GENETIC_VARIANTS if name not in ("2fairga", "ga", "ga3")
)

ABLATION_VARIANTS = (
    "2fairga", "ga-cluster-provider-fair", "ga-fair", "ga-provider-fair", "ga-customer-fair", "ga3",
)


def get_algorithm(
    name: str,
    ga_config: Optional[GAConfig] = None,
    cold_start: bool = False
) -> DispatchAlgorithm:
    """Build a dispatch algorithm by registry name

    Raises:
        ConfigurationError: If the name is unknown
    """
    if name == "greedy":
        return GreedyProbabilityDispatcher()
    if name == "nearest":
        return NearestDispatcher()
    if name in GENETIC_VARIANTS:
        stages, placement = GENETIC_VARIANTS[name]
        return GeneticDispatcher(name, ga_config or GAConfig(), stages, placement, cold_start)
    raise ConfigurationError(f"Unknown algorithm '{name}'; choose from {', '.join(ALGORITHMS)}")


__all__ = [
    "ABLATION_VARIANTS",
    "ALGORITHMS",
    "DispatchAlgorithm",
    "GeneticDispatcher",
    "GreedyProbabilityDispatcher",
    "NearestDispatcher",
    "ga3_plan",
    "get_algorithm",
    "greedy_probability_plan",
    "nearest_plan",
    "plain_ga_plan",
]
