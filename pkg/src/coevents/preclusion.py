"""
Precluded events and zero covers.

An event is precluded when its quantum measure is at most ε. The family of
precluded events is found by one vectorized scan of the subset lattice; its
maximal members (those with no precluded strict superset) are found with a
superset-sum transform over the same lattice.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from src.config.toolkit_config import get_settings
from src.measure.event_algebra import Event, HistorySpace, union_all
from src.measure.models import DomainError
from src.measure.quantum_measure import DecoherenceMatrix, all_event_measures, measure

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PrecludedFamily:
    """All nonempty events with μ ≤ ε, and the maximal ones among them."""

    space: HistorySpace
    events: Tuple[Event, ...]
    measures: Tuple[float, ...]
    maximal: Tuple[Event, ...]
    epsilon: float

    def __len__(self) -> int:
        return len(self.events)

    def __contains__(self, event: Event) -> bool:
        return any(event.mask == e.mask for e in self.events)

    def covered(self) -> Event:
        """Union of all precluded events."""
        return union_all(self.space, self.maximal)


@dataclass(frozen=True, eq=False)
class ZeroCover:
    """Precluded events whose union is Ω."""

    space: HistorySpace
    cover: Tuple[Event, ...]
    epsilon: float

    def certify(self, d: DecoherenceMatrix) -> bool:
        """Re-check every member against D instead of trusting the search."""
        return certify_zero_cover(self.cover, d, self.epsilon)


def superset_counts(flags: np.ndarray, n: int) -> np.ndarray:
    """
    For each mask, how many flagged masks contain it (itself included).

    Standard sum-over-supersets transform, one pass per history.
    """
    counts = flags.astype(np.int64)
    for bit in range(n):
        view = counts.reshape(-1, 2, 1 << bit)
        view[:, 0, :] += view[:, 1, :]
    return counts


def _popcounts(masks: np.ndarray, n: int) -> np.ndarray:
    counts = np.zeros(masks.shape, dtype=np.int64)
    for bit in range(n):
        counts += (masks >> bit) & 1
    return counts


def enumerate_precluded(
    d: DecoherenceMatrix,
    epsilon: Optional[float] = None,
    cap: Optional[int] = None,
) -> PrecludedFamily:
    """
    Every nonempty event with μ ≤ ε plus the maximal antichain.

    Args:
        d: Decoherence matrix
        epsilon: Preclusion tolerance (default: settings.preclusion_epsilon)
        cap: Enumeration cap on |Ω|

    Returns:
        PrecludedFamily with events in report order (size, then position order)

    Raises:
        CapacityError: if |Ω| exceeds the cap
    """
    epsilon = get_settings().preclusion_epsilon if epsilon is None else epsilon
    n = d.size
    mu = all_event_measures(d, cap)
    flags = mu <= epsilon
    flags[0] = False
    if flags[-1]:
        raise DomainError(f"Ω itself is precluded at ε={epsilon}; the measure is not normalized")
    counts = superset_counts(flags, n)
    maximal_flags = flags & (counts == 1)

    space = d.space
    masks = np.flatnonzero(flags)
    events = sorted((Event(space, int(m)) for m in masks), key=Event.sort_key)
    maximal = sorted(
        (Event(space, int(m)) for m in np.flatnonzero(maximal_flags)), key=Event.sort_key
    )
    measures = tuple(max(float(mu[e.mask]), 0.0) for e in events)
    logger.info(
        f"Found {len(events)} precluded events ({len(maximal)} maximal) "
        f"among {mu.size - 1} nonempty events at ε={epsilon:g}"
    )
    return PrecludedFamily(space, tuple(events), measures, tuple(maximal), epsilon)


def find_zero_cover(family: PrecludedFamily) -> Optional[ZeroCover]:
    """
    A cover of Ω by maximal precluded events, if one exists.

    Greedy assembly (largest uncovered gain first, report order breaks ties),
    then members whose removal keeps the union equal to Ω are dropped.
    """
    space = family.space
    full = space.full_mask
    if family.covered().mask != full:
        logger.info("No zero cover: maximal precluded events leave histories uncovered")
        return None

    chosen: List[Event] = []
    uncovered = full
    while uncovered:
        best = max(family.maximal, key=lambda e: (e.mask & uncovered).bit_count())
        chosen.append(best)
        uncovered &= ~best.mask

    for event in list(reversed(chosen)):
        others = [e for e in chosen if e is not event]
        if others and union_all(space, others).mask == full:
            chosen = others

    cover = tuple(sorted(chosen, key=Event.sort_key))
    logger.info(f"Zero cover with {len(cover)} members found")
    return ZeroCover(space, cover, family.epsilon)


def certify_zero_cover(events: Iterable[Event], d: DecoherenceMatrix, epsilon: Optional[float] = None) -> bool:
    """True iff every event has μ ≤ ε and the events cover Ω."""
    epsilon = get_settings().preclusion_epsilon if epsilon is None else epsilon
    events = list(events)
    if not events:
        return False
    if any(measure(d, e) > epsilon for e in events):
        return False
    return union_all(d.space, events).is_full


def singleton_covered(family: PrecludedFamily) -> List[int]:
    """
    Positions of histories lying in some precluded event.

    When this is all of Ω no single history can be the reality.
    """
    return list(family.covered())
