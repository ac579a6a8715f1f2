"""
Coevent solver.

A coevent is a minimal non-preclusive event: contained in no precluded event,
with no proper nonempty subset that is also non-preclusive. Because A is
non-preclusive iff A meets Ω∖M for every maximal precluded M, the coevents
are exactly the minimal transversals of the complements of the maximal
precluded events. Both that computation and an exhaustive lattice scan are
available and must agree; a plain brute-force enumeration serves as oracle.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Set, Tuple, Union

import numpy as np

from src.config.toolkit_config import CoeventMethod, get_settings
from src.measure.event_algebra import Event, HistorySpace
from src.measure.models import DomainError, check_capacity, describe_mismatch
from src.measure.quantum_measure import DecoherenceMatrix
from .preclusion import PrecludedFamily, enumerate_precluded, superset_counts

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Coevent:
    """A potential reality, identified by its support."""

    support: Event

    def __post_init__(self):
        if not self.support:
            raise DomainError("a coevent needs a nonempty support")

    def to_labels(self) -> List[str]:
        return self.support.to_labels()


@dataclass(frozen=True, eq=False)
class CoeventSet:
    """The complete coevent set ℛ computed at one ε."""

    space: HistorySpace
    coevents: Tuple[Coevent, ...]
    epsilon: float

    def __len__(self) -> int:
        return len(self.coevents)

    def __iter__(self):
        return iter(self.coevents)

    def supports(self) -> List[Event]:
        return [c.support for c in self.coevents]

    def support_masks(self) -> Set[int]:
        return {c.support.mask for c in self.coevents}

    def to_labels(self) -> List[List[str]]:
        """Sorted list of sorted label arrays."""
        return [c.to_labels() for c in self.coevents]


def _coevent_set(space: HistorySpace, masks: Iterable[int], epsilon: float) -> CoeventSet:
    supports = sorted((Event(space, m) for m in masks), key=Event.sort_key)
    return CoeventSet(space, tuple(Coevent(s) for s in supports), epsilon)


def is_non_preclusive(event: Event, family: PrecludedFamily) -> bool:
    """
    True iff A lies inside no precluded event.

    Raises:
        DomainError: if A is empty or over another space
    """
    if event.space != family.space:
        raise DomainError(describe_mismatch(family.space, event.space))
    if not event:
        raise DomainError("non-preclusiveness is defined for nonempty events")
    return all(event.mask & ~m.mask for m in family.maximal)


def minimal_transversals(edges: Iterable[int]) -> List[int]:
    """
    Minimal hitting sets of a hypergraph given as bitmask edges (Berge).

    Edges are processed one at a time; transversals that miss the new edge
    are extended by each of its vertices and the result is minimized.
    """
    transversals: Set[int] = {0}
    for edge in sorted(set(edges), key=lambda e: (e.bit_count(), e)):
        if edge == 0:
            raise DomainError("an empty edge has no transversal")
        candidates: Set[int] = set()
        for t in transversals:
            if t & edge:
                candidates.add(t)
                continue
            vertices = edge
            while vertices:
                low = vertices & -vertices
                candidates.add(t | low)
                vertices ^= low
        ordered = sorted(candidates, key=lambda c: (c.bit_count(), c))
        kept: List[int] = []
        for c in ordered:
            if not any(k & ~c == 0 for k in kept):
                kept.append(c)
        transversals = set(kept)
    return sorted(transversals)


def _transversal_masks(family: PrecludedFamily) -> List[int]:
    full = family.space.full_mask
    if not family.maximal:
        return [1 << i for i in range(family.space.size)]
    return minimal_transversals(full & ~m.mask for m in family.maximal)


def _lattice_masks(family: PrecludedFamily) -> List[int]:
    n = family.space.size
    check_capacity("solve_coevents", n, get_settings().enumeration_cap)
    flags = np.zeros(1 << n, dtype=bool)
    for event in family.events:
        flags[event.mask] = True
    non_preclusive = superset_counts(flags, n) == 0
    non_preclusive[0] = False
    minimal = non_preclusive.copy()
    masks = np.arange(1 << n)
    for bit in range(n):
        has_bit = (masks >> bit) & 1 == 1
        below = np.zeros_like(minimal)
        below[has_bit] = non_preclusive[masks[has_bit] ^ (1 << bit)]
        minimal &= ~below
    return [int(m) for m in np.flatnonzero(minimal)]


def solve_family(
    family: PrecludedFamily,
    method: Union[CoeventMethod, str, None] = None,
) -> CoeventSet:
    """Coevents of an already enumerated precluded family."""
    method = CoeventMethod(method) if method is not None else get_settings().coevent_method
    if method is CoeventMethod.TRANSVERSAL:
        masks = _transversal_masks(family)
    else:
        masks = _lattice_masks(family)
    result = _coevent_set(family.space, masks, family.epsilon)
    logger.info(f"Solved {len(result)} coevents via {method.value} at ε={family.epsilon:g}")
    return result


def solve_coevents(
    d: DecoherenceMatrix,
    epsilon: Optional[float] = None,
    method: Union[CoeventMethod, str, None] = None,
    cap: Optional[int] = None,
) -> CoeventSet:
    """
    The complete coevent set ℛ: all minimal non-preclusive events.

    Args:
        d: Decoherence matrix
        epsilon: Preclusion tolerance (default: settings.preclusion_epsilon)
        method: "transversal" (default) or "lattice"
        cap: Enumeration cap on |Ω|

    Raises:
        CapacityError: if |Ω| exceeds the cap
    """
    family = enumerate_precluded(d, epsilon, cap)
    return solve_family(family, method)


def brute_force_coevents(
    d: DecoherenceMatrix,
    epsilon: Optional[float] = None,
    cap: Optional[int] = None,
) -> CoeventSet:
    """
    Oracle: scan events by ascending size, keep non-preclusive ones with no kept subset.

    Raises:
        CapacityError: if |Ω| exceeds the brute-force cap
    """
    cap = get_settings().brute_force_cap if cap is None else cap
    check_capacity("brute_force_coevents", d.size, cap)
    family = enumerate_precluded(d, epsilon)
    space = d.space
    kept: List[int] = []
    for size in range(1, space.size + 1):
        for combo in itertools.combinations(range(space.size), size):
            event = Event.from_indices(space, combo)
            if any(k & ~event.mask == 0 for k in kept):
                continue
            if is_non_preclusive(event, family):
                kept.append(event.mask)
    return _coevent_set(space, kept, family.epsilon)


def coevent_sets_disjoint(first: CoeventSet, second: CoeventSet) -> bool:
    """
    True iff no coevent support appears in both sets.

    Raises:
        DomainError: for different sample spaces or different ε
    """
    if first.space != second.space:
        raise DomainError(describe_mismatch(first.space, second.space))
    if first.epsilon != second.epsilon:
        raise DomainError(
            f"coevent sets were computed at different ε ({first.epsilon:g} vs {second.epsilon:g})"
        )
    return not (first.support_masks() & second.support_masks())
