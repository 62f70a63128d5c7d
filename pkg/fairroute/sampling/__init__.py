"""Initial provider placement"""

from .clustering import ClusterModel, constrained_kmeans
from .placement import distribute_providers, load_placement, place_providers, save_placement

__all__ = [
    "ClusterModel",
    "constrained_kmeans",
    "distribute_providers",
    "load_placement",
    "place_providers",
    "save_placement",
]
