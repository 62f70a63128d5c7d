"""FairRoute - Two-sided fair dynamic vehicle routing"""

__version__ = "0.1.0"
__description__ = "Fairness-aware dynamic routing engine and benchmark harness"

from .errors import FairRouteError

__all__ = ["FairRouteError"]
