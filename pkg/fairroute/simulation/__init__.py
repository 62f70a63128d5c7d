"""Rolling-horizon simulation"""

from .simulator import SimulationResult, Simulator, run_simulation, validate_events

__all__ = ["SimulationResult", "Simulator", "run_simulation", "validate_events"]
