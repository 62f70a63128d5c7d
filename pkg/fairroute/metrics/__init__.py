"""Utility, fairness and distance metrics"""

from .fairness import (
    AreaPartition,
    customer_fairness,
    customer_fairness_raw,
    population_variance,
    provider_fairness,
)
from .geo import haversine, haversine_vectorized
from .report import MetricsReport
from .utility import AwardEvent, capture_utility, ride_utility, total_utility

__all__ = [
    "AreaPartition",
    "AwardEvent",
    "MetricsReport",
    "capture_utility",
    "customer_fairness",
    "customer_fairness_raw",
    "haversine",
    "haversine_vectorized",
    "population_variance",
    "provider_fairness",
    "ride_utility",
    "total_utility",
]
