"""Common interface of dispatch algorithms"""

from abc import ABC, abstractmethod

from ..optimization.encoding import AllocationPlan
from ..optimization.fitness import WorldSnapshot


class DispatchAlgorithm(ABC):
    """Abstract base class for dispatch algorithms

    The simulator calls :meth:`plan` at every epoch with a snapshot holding
    the idle providers, the planning pool and the running ledgers.
    """

    # Placement used when the scenario does not name one
    default_placement: str = "random"

    # Providers that still hold a route are re-planned whenever they stand on a node
    replan_at_nodes: bool = False

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry name of the algorithm"""
        pass

    @abstractmethod
    def plan(self, snapshot: WorldSnapshot, epoch: int = 0) -> AllocationPlan:
        """Allocate the snapshot's pool to its idle providers

        Args:
            snapshot: Frozen world view for this epoch
            epoch: Re-planning instant (simulation minute)

        Returns:
            Plan covering every idle provider; no request appears twice
        """
        pass

    def reset(self) -> None:
        """Forget state carried between epochs (called before each run)"""
        pass

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"
