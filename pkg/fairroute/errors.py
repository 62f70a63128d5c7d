"""Custom exceptions for FairRoute"""


class FairRouteError(Exception):
    """Base exception for all FairRoute errors"""
    pass


class ConfigurationError(FairRouteError):
    """Raised when configuration is invalid"""
    pass


class GraphError(FairRouteError):
    """Raised when the road graph is malformed or queried with unknown nodes"""
    pass


class UnreachableError(GraphError):
    """Raised when no directed path joins two nodes"""

    def __init__(self, source: int, target: int):
        self.source = source
        self.target = target
        super().__init__(f"Node {target} is unreachable from node {source}")


class DataFormatError(FairRouteError):
    """Raised when an input file cannot be parsed

    Carries the offending path and 1-based line number when known.
    """

    def __init__(self, message: str, path: str = "", line: int = 0):
        self.path = path
        self.line = line
        location = f"{path}:{line}: " if path and line else (f"{path}: " if path else "")
        super().__init__(f"{location}{message}")


class ClusteringError(FairRouteError):
    """Raised when constrained clustering is infeasible or fails"""
    pass


class EncodingError(FairRouteError):
    """Raised when a chromosome cannot be built or violates its invariants"""
    pass


class OptimizationError(FairRouteError):
    """Raised when an optimization run fails"""
    pass


class SimulationError(FairRouteError):
    """Raised when the simulation reaches an inconsistent state"""
    pass


class DoubleServiceError(SimulationError):
    """Raised when a request that was already served is served again"""
    pass


class MetricsError(FairRouteError):
    """Raised when a metric is undefined for its inputs"""
    pass


class WritingError(FairRouteError):
    """Raised when writing output files fails"""
    pass
