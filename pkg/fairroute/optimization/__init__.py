"""Genetic optimization for FairRoute"""

from .encoding import AllocationPlan, Chromosome, decode, encode_random, encode_warm, enforce_leader
from .engine import COMBINED_STAGES, FULL_STAGES, PLAIN_STAGES, FairGAEngine, GAResult, GAStages, run_fairga
from .fitness import Fitness, PlanEvaluator, WorldSnapshot, capture_probability, rank
from .operators import assign_provider, crossover, local_optimization, mutate, select_cross_rate
from .statistics import GAStatistics

__all__ = [
    "AllocationPlan",
    "Chromosome",
    "COMBINED_STAGES",
    "FULL_STAGES",
    "PLAIN_STAGES",
    "FairGAEngine",
    "Fitness",
    "GAResult",
    "GAStages",
    "GAStatistics",
    "PlanEvaluator",
    "WorldSnapshot",
    "assign_provider",
    "capture_probability",
    "crossover",
    "decode",
    "encode_random",
    "encode_warm",
    "enforce_leader",
    "local_optimization",
    "mutate",
    "rank",
    "run_fairga",
    "select_cross_rate",
]
