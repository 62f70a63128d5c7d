"""Per-step movement of providers along shortest paths"""

import logging
from dataclasses import dataclass, field
from typing import List

from .entities import ServiceProvider
from .graph import RoadGraph

logger = logging.getLogger(__name__)

_EPSILON = 1e-9


@dataclass
class MovementResult:
    """What happened to one provider during one step"""

    distance_m: float = 0.0
    nodes_reached: List[int] = field(default_factory=list)
    arrived: bool = False  # reached the current target node


def _apply_pending_instruction(provider: ServiceProvider, graph: RoadGraph) -> None:
    route, target = provider.pending_instruction
    path = graph.shortest_path(provider.location, target) if target is not None else []
    provider.instruct(route, target, path)
    logger.debug(f"Provider {provider.id} adopted deferred route {route} at node {provider.location}")


def advance_provider(provider: ServiceProvider, graph: RoadGraph, dt: float = 1.0) -> MovementResult:
    """Move a provider for ``dt`` minutes at the graph speed

    The provider travels at most ``speed * dt`` meters along its path and stops
    on reaching its target node, leaving any remaining budget unused. Deferred
    instructions are adopted at the first node reached.

    Args:
        provider: Provider to move (mutated in place)
        graph: Road graph
        dt: Step length in minutes

    Returns:
        MovementResult with the displacement and arrival flag
    """
    result = MovementResult()
    budget = graph.speed * dt

    while budget > _EPSILON:
        if provider.is_at_node and provider.pending_instruction is not None:
            _apply_pending_instruction(provider, graph)

        if not provider.path:
            break

        next_node = provider.path[0]
        remaining = graph.edge_length(provider.location, next_node) - provider.position_progress

        if budget + _EPSILON >= remaining:
            budget -= remaining
            result.distance_m += remaining
            provider.location = next_node
            provider.position_progress = 0.0
            provider.path.pop(0)
            result.nodes_reached.append(next_node)

            if provider.pending_instruction is not None:
                _apply_pending_instruction(provider, graph)
                continue

            if not provider.path and provider.target_node == next_node:
                result.arrived = True
                break
        else:
            provider.position_progress += budget
            result.distance_m += budget
            budget = 0.0

    if result.nodes_reached and provider.has_arrived:
        result.arrived = True

    provider.distance_m += result.distance_m
    return result
