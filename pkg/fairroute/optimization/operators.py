"""Genetic operators over random-keys chromosomes"""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from .encoding import Chromosome, decode, encode_random, enforce_leader
from .fitness import Move, MoveScorer, PlanEvaluator

logger = logging.getLogger(__name__)

# Relative margin a fairness move must clear
_IMPROVEMENT_TOLERANCE = 1e-12

FAIRNESS_CRITERIA = {
    'provider': 'provider_fairness',
    'customer': 'customer_fairness',
}


def select_cross_rate(ordered: Sequence[Chromosome], cross_rate: float) -> List[Chromosome]:
    """Top ceil(cross_rate * size) chromosomes of a ranked population, at least one"""
    count = max(1, int(math.ceil(cross_rate * len(ordered))))
    return list(ordered[:count])


def crossover_at(mother: Chromosome, father: Chromosome, cut: int) -> Chromosome:
    """Mother's keys before ``cut``, father's from ``cut`` on, leader re-enforced"""
    if not mother.same_elements(father):
        raise ValueError("Parents must share the same elements")
    keys = np.concatenate([mother.keys[:cut], father.keys[cut:]])
    return enforce_leader(mother.with_keys(keys))


def crossover(mother: Chromosome, father: Chromosome, rng: np.random.Generator) -> Chromosome:
    """Single-point crossover with a uniform cut in [0, length]"""
    cut = int(rng.integers(0, len(mother.keys) + 1))
    return crossover_at(mother, father, cut)


def swap_mutation(chromosome: Chromosome, rng: np.random.Generator) -> Chromosome:
    """Swap the keys of two random positions"""
    keys = chromosome.keys.copy()
    if len(keys) < 2:
        return chromosome.copy()
    i, j = rng.choice(len(keys), size=2, replace=False)
    keys[i], keys[j] = keys[j], keys[i]
    return enforce_leader(chromosome.with_keys(keys))


def mutate(
    ordered: Sequence[Chromosome],
    mutate_rate: float,
    rng: np.random.Generator,
    elite_count: int = 0,
    mode: str = 'swap'
) -> List[Chromosome]:
    """Perturb the worst floor(mutate_rate * size) chromosomes of a ranked population

    Elites are never touched. ``mode`` 'swap' applies one key swap, 'immigrate'
    replaces the chromosome with a fresh random one.
    """
    population = list(ordered)
    size = len(population)
    count = int(math.floor(mutate_rate * size))
    start = max(elite_count, size - count)

    for position in range(start, size):
        victim = population[position]
        if mode == 'immigrate':
            population[position] = encode_random(victim.provider_ids, victim.request_ids, rng)
        else:
            population[position] = swap_mutation(victim, rng)

    return population


def move_to_front(chromosome: Chromosome, provider_id: int, request_id: int) -> Chromosome:
    """Re-key a request so it sorts right after the given provider"""
    keys = chromosome.keys.copy()
    provider_index = chromosome.index_of(('P', provider_id))
    request_index = chromosome.index_of(('R', request_id))

    order = [int(i) for i in chromosome.sorted_indices() if i != request_index]
    position = order.index(provider_index)
    low = keys[provider_index]
    high = keys[order[position + 1]] if position + 1 < len(order) else 1.0

    new_key = (low + high) / 2.0
    if not low <= new_key <= high:
        new_key = low
    keys[request_index] = new_key
    return chromosome.with_keys(keys)


def assign_provider(chromosome: Chromosome, fairness_type: str, evaluator: PlanEvaluator) -> Chromosome:
    """Move, for each provider, the request that best improves fairness to its segment front

    Providers are visited in genome order. The candidates of a provider are
    the requests currently in its segment plus the unassigned ones; each is
    tried at the front of the segment and the move that strictly lowers the
    chosen whole-plan variance the most is kept (lowest request id on ties).
    At most one move per provider. Moves are scored incrementally by
    :class:`MoveScorer`.

    Args:
        chromosome: Chromosome to adjust
        fairness_type: 'provider' or 'customer'
        evaluator: Evaluator bound to the current snapshot

    Returns:
        Adjusted chromosome (a copy)
    """
    try:
        criterion = FAIRNESS_CRITERIA[fairness_type]
    except KeyError as e:
        raise ValueError(f"Unknown fairness type: {fairness_type}") from e

    if not chromosome.request_ids:
        return chromosome.copy()

    scorer = MoveScorer(evaluator, decode(chromosome).routes, criterion)
    current = scorer.score

    result = chromosome
    for provider_id in chromosome.provider_ids:
        best: Optional[Move] = None
        threshold = current + _IMPROVEMENT_TOLERANCE * max(1.0, abs(current))

        for request_id in chromosome.request_ids:
            if scorer.owner.get(request_id, provider_id) != provider_id:
                continue
            move = scorer.propose(request_id, provider_id)
            if move is not None and move.score > (best.score if best is not None else threshold):
                best = move

        if best is not None:
            scorer.apply(best)
            current = best.score
            result = move_to_front(result, provider_id, best.request_id)

    return result if result is not chromosome else chromosome.copy()


def _best_first_order(
    evaluator: PlanEvaluator,
    provider_id: int,
    head: Sequence[int]
) -> List[int]:
    snapshot = evaluator.snapshot
    location = snapshot.provider_locations[provider_id]
    t = snapshot.now
    remaining = list(head)
    order: List[int] = []

    while remaining:
        legs = [evaluator.leg(provider_id, location, t, rid, first=not order) for rid in remaining]
        best = min(legs, key=lambda leg: (-leg.value, leg.request_id))
        order.append(best.request_id)
        remaining.remove(best.request_id)
        location, t = evaluator.after_leg(best, location, t)

    return order


def local_optimization(chromosome: Chromosome, window: int, evaluator: PlanEvaluator) -> Chromosome:
    """Reorder the first ``window`` targets of every segment best-first

    Targets are picked greedily by the highest projected value from the
    provider's position after the previous pick (lowest id on ties). The
    segment's own keys are redistributed, so boundaries never move.
    """
    if window < 2 or not chromosome.request_ids:
        return chromosome.copy()

    plan = decode(chromosome)
    keys = chromosome.keys.copy()
    changed = False

    for provider_id in chromosome.provider_ids:
        route = plan.routes[provider_id]
        head = route[:min(window, len(route))]
        if len(head) < 2:
            continue

        order = _best_first_order(evaluator, provider_id, head)
        if order == head:
            continue

        indices = [chromosome.index_of(('R', rid)) for rid in head]
        slot_keys = sorted(keys[i] for i in indices)
        for rid, key in zip(order, slot_keys):
            keys[chromosome.index_of(('R', rid))] = key
        changed = True

    return chromosome.with_keys(keys) if changed else chromosome.copy()
