"""Leader-based random-keys genome and its decoding into allocation plans

The genome is a key vector over a canonical element order: provider ids
ascending, then request ids ascending. Sorting the keys yields the visiting
sequence; every request belongs to the closest provider before it.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import EncodingError

logger = logging.getLogger(__name__)

PROVIDER = 'P'
REQUEST = 'R'

Element = Tuple[str, int]


@dataclass
class AllocationPlan:
    """Ordered request ids per provider plus requests left unassigned"""

    routes: Dict[int, List[int]] = field(default_factory=dict)
    unassigned: List[int] = field(default_factory=list)

    @property
    def assigned(self) -> List[int]:
        return [rid for pid in sorted(self.routes) for rid in self.routes[pid]]

    def provider_of(self, request_id: int) -> Optional[int]:
        for provider_id, route in self.routes.items():
            if request_id in route:
                return provider_id
        return None

    def validate(self) -> None:
        """Check that no request appears twice

        Raises:
            EncodingError: On a duplicated request id
        """
        seen = set()
        for request_id in self.assigned + list(self.unassigned):
            if request_id in seen:
                raise EncodingError(f"Request {request_id} appears more than once in the plan")
            seen.add(request_id)

    @classmethod
    def empty(cls, provider_ids: Sequence[int], request_ids: Sequence[int] = ()) -> 'AllocationPlan':
        return cls(routes={pid: [] for pid in provider_ids}, unassigned=sorted(request_ids))


class Chromosome:
    """Random-keys genome over providers and requests

    Keys live in canonical element order; ``fitness`` caches the evaluation
    against one world snapshot.
    """

    def __init__(self, provider_ids: Sequence[int], request_ids: Sequence[int], keys: np.ndarray):
        self.provider_ids: Tuple[int, ...] = tuple(sorted(provider_ids))
        self.request_ids: Tuple[int, ...] = tuple(sorted(request_ids))
        self.keys = np.asarray(keys, dtype=np.float64).copy()
        self.fitness = None

        if len(self.keys) != len(self.provider_ids) + len(self.request_ids):
            raise EncodingError(
                f"Key vector of length {len(self.keys)} does not match "
                f"{len(self.provider_ids)} providers and {len(self.request_ids)} requests"
            )

    @property
    def provider_count(self) -> int:
        return len(self.provider_ids)

    @property
    def elements(self) -> List[Element]:
        return [(PROVIDER, pid) for pid in self.provider_ids] + [(REQUEST, rid) for rid in self.request_ids]

    @property
    def genes(self) -> List[Tuple[Element, float]]:
        return list(zip(self.elements, (float(k) for k in self.keys)))

    def index_of(self, element: Element) -> int:
        kind, element_id = element
        try:
            if kind == PROVIDER:
                return self.provider_ids.index(element_id)
            return self.provider_count + self.request_ids.index(element_id)
        except ValueError as e:
            raise EncodingError(f"Element {kind}{element_id} is not in the chromosome") from e

    def sorted_indices(self) -> np.ndarray:
        """Positions in ascending key order; equal keys keep canonical order"""
        return np.argsort(self.keys, kind='stable')

    def key_map(self) -> Dict[Element, float]:
        return dict(self.genes)

    def copy(self) -> 'Chromosome':
        clone = Chromosome(self.provider_ids, self.request_ids, self.keys)
        clone.fitness = self.fitness
        return clone

    def with_keys(self, keys: np.ndarray) -> 'Chromosome':
        return Chromosome(self.provider_ids, self.request_ids, keys)

    def same_elements(self, other: 'Chromosome') -> bool:
        return self.provider_ids == other.provider_ids and self.request_ids == other.request_ids

    def dump(self) -> str:
        """One "element_id key" line per gene, sorted by key"""
        elements = self.elements
        lines = []
        for index in self.sorted_indices():
            kind, element_id = elements[index]
            lines.append(f"{kind}{element_id} {self.keys[index]:.12f}")
        return '\n'.join(lines)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chromosome):
            return NotImplemented
        return self.same_elements(other) and np.array_equal(self.keys, other.keys)

    def __repr__(self) -> str:
        return f"Chromosome(providers={len(self.provider_ids)}, requests={len(self.request_ids)})"


def enforce_leader(chromosome: Chromosome) -> Chromosome:
    """Give the smallest key to a provider by swapping it with the minimum provider key

    Returns a new chromosome; idempotent.
    """
    if chromosome.provider_count == 0:
        raise EncodingError("Cannot enforce a leader without providers")

    keys = chromosome.keys.copy()
    lowest = int(np.argmin(keys))
    if lowest >= chromosome.provider_count:
        best_provider = int(np.argmin(keys[:chromosome.provider_count]))
        keys[lowest], keys[best_provider] = keys[best_provider], keys[lowest]
    return chromosome.with_keys(keys)


def encode_random(
    provider_ids: Sequence[int],
    request_ids: Sequence[int],
    rng: np.random.Generator
) -> Chromosome:
    """Uniform [0, 1) keys for every provider and request, leader enforced

    Raises:
        EncodingError: If there is no provider to lead
    """
    if not provider_ids:
        raise EncodingError("At least one idle provider is required to encode a plan")
    keys = rng.random(len(provider_ids) + len(request_ids))
    return enforce_leader(Chromosome(provider_ids, request_ids, keys))


def encode_warm(
    previous: Optional[Mapping[Element, float]],
    provider_ids: Sequence[int],
    request_ids: Sequence[int],
    rng: np.random.Generator
) -> Chromosome:
    """Re-encode reusing the previous keys of elements that are still present

    New elements get fresh uniform keys; elements no longer present are
    dropped with the old genome.
    """
    if not provider_ids:
        raise EncodingError("At least one idle provider is required to encode a plan")

    chromosome = encode_random(provider_ids, request_ids, rng)
    if not previous:
        return chromosome

    fresh = chromosome.keys.copy()
    for index, element in enumerate(chromosome.elements):
        if element in previous:
            fresh[index] = previous[element]
    return enforce_leader(chromosome.with_keys(fresh))


def decode(chromosome: Chromosome) -> AllocationPlan:
    """Split the key-sorted sequence into provider segments

    Requests sorted before the first provider end up unassigned, which only
    happens when the leader property was broken.
    """
    plan = AllocationPlan.empty(chromosome.provider_ids)
    elements = chromosome.elements
    current: Optional[int] = None

    for index in chromosome.sorted_indices():
        kind, element_id = elements[index]
        if kind == PROVIDER:
            current = element_id
        elif current is None:
            plan.unassigned.append(element_id)
        else:
            plan.routes[current].append(element_id)

    return plan
