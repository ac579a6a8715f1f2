"""
Cournot-principle predictions.

An event of measure at most ε that was singled out in advance is predicted
not to occur. Events must be declared in a PredictionConfig before they can
be evaluated; there is no scan for small-measure events after the fact.
Repeated trials are modelled by n independent identical copies whose
decoherence matrix is the n-fold Kronecker power of the base one.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import binom

from src.config.toolkit_config import get_settings
from src.measure.event_algebra import Event, ProductSpace
from src.measure.models import DomainError, describe_mismatch
from src.measure.quantum_measure import DecoherenceMatrix, measure, product_decoherence

logger = logging.getLogger(__name__)

BOUNDARY_SLACK = 1e-9

DICHOTOMY_NOTE = (
    "Verdicts are predictions about events declared in advance; they say nothing "
    "about which coevent is realized."
)


@dataclass(frozen=True)
class DeclaredEvent:
    """An event named before any measure is evaluated."""
    name: str
    event: Event


@dataclass(frozen=True)
class PredictionConfig:
    """The Cournot threshold and the events declared under it."""

    epsilon_cournot: float
    declared_in_advance: Tuple[DeclaredEvent, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0.0 < self.epsilon_cournot < 1.0:
            raise DomainError(f"epsilon_cournot must lie in (0, 1), got {self.epsilon_cournot}")
        object.__setattr__(self, "declared_in_advance", tuple(self.declared_in_advance))

    @classmethod
    def with_defaults(cls, declared: Sequence[DeclaredEvent] = ()) -> "PredictionConfig":
        return cls(get_settings().cournot_epsilon, tuple(declared))

    def is_declared(self, event: Event) -> bool:
        return any(d.event == event for d in self.declared_in_advance)


@dataclass(frozen=True)
class CournotEntry:
    """Verdict for one declared event."""
    name: str
    event: Event
    measure: float
    epsilon: float
    approximately_precluded: bool

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return {
            "name": self.name,
            "event": self.event.to_labels(),
            "measure": self.measure,
            "epsilon": self.epsilon,
            "approximately_precluded": self.approximately_precluded,
        }


@dataclass(frozen=True)
class CournotReport:
    """Verdicts for every declared event at one ε."""

    epsilon: float
    entries: Tuple[CournotEntry, ...]
    note: str = DICHOTOMY_NOTE

    @property
    def declared_count(self) -> int:
        return len(self.entries)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return {
            "epsilon": self.epsilon,
            "declared_count": self.declared_count,
            "entries": [e.to_dict() for e in self.entries],
            "note": self.note,
        }


def approximately_precluded(d: DecoherenceMatrix, event: Event, cfg: PredictionConfig) -> bool:
    """
    True iff μ(A) ≤ ε for an event declared in cfg.

    Raises:
        DomainError: if the event was not declared in advance
    """
    if event.space != d.space:
        raise DomainError(describe_mismatch(d.space, event.space))
    if not cfg.is_declared(event):
        raise DomainError(f"event {event} was not declared in advance")
    return measure(d, event) <= cfg.epsilon_cournot


def product_system(d: DecoherenceMatrix, copies: int, cap: Optional[int] = None) -> DecoherenceMatrix:
    """
    Decoherence matrix of n independent identical copies over the product space.

    For n=1 the entries are those of D, indexed by 1-tuples.
    """
    return product_decoherence(d, copies, cap)


def success_counts(space: ProductSpace, event: Event) -> np.ndarray:
    """For each n-tuple, how many of its entries fall in the base event A."""
    if event.space != space.base:
        raise DomainError(describe_mismatch(space.base, event.space))
    hits = event.indicator().astype(np.int64)
    counts = hits
    for _ in range(space.copies - 1):
        counts = np.add.outer(counts, hits).ravel()
    return counts


def frequency_deviation_event(space: ProductSpace, event: Event, p: float, delta: float) -> Event:
    """
    All n-tuples whose relative frequency of A deviates from p by more than delta.

    Raises:
        DomainError: if p lies outside [0, 1] or delta is not positive
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if delta <= 0.0:
        raise DomainError(f"delta must be positive, got {delta}")
    counts = success_counts(space, event)
    flags = _deviates(counts, space.copies, p, delta)
    return Event.from_indicator(space, flags)


def _deviates(counts: np.ndarray, n: int, p: float, delta: float) -> np.ndarray:
    # compared on counts so |k/n - p| == delta is never a deviation
    slack = BOUNDARY_SLACK * n
    return np.abs(counts - p * n) > delta * n + slack


def sequence_event(space: ProductSpace, labels: Sequence[str]) -> Event:
    """The single n-tuple with the given base labels."""
    if len(labels) != space.copies:
        raise DomainError(f"a sequence over {space.copies} copies needs {space.copies} labels")
    digits = [space.base.index(label) for label in labels]
    return Event(space, 1 << int(np.ravel_multi_index(digits, space.shape)))


def cournot_report(
    d: DecoherenceMatrix,
    declared: Optional[Sequence[DeclaredEvent]],
    cfg: PredictionConfig,
) -> CournotReport:
    """
    Measure and verdict for each declared event, in declaration order.

    Args:
        d: Decoherence matrix the events live over
        declared: Events to evaluate (default: everything declared in cfg)
        cfg: Threshold and the declarations every event must appear in

    Raises:
        DomainError: if an event was not declared in cfg
    """
    declared = cfg.declared_in_advance if declared is None else tuple(declared)
    entries: List[CournotEntry] = []
    for item in declared:
        verdict = approximately_precluded(d, item.event, cfg)
        entries.append(CournotEntry(
            name=item.name,
            event=item.event,
            measure=measure(d, item.event),
            epsilon=cfg.epsilon_cournot,
            approximately_precluded=verdict,
        ))
    flagged = sum(e.approximately_precluded for e in entries)
    logger.info(f"📊 Cournot report: {flagged}/{len(entries)} declared events approximately precluded")
    return CournotReport(cfg.epsilon_cournot, tuple(entries))


def binomial_tail(n: int, q: float, p: float, delta: float) -> float:
    """
    Exact probability that k successes in n trials with success probability q
    satisfy |k/n − p| > delta.
    """
    k = np.arange(n + 1)
    mask = _deviates(k, n, p, delta)
    return float(binom.pmf(k[mask], n, q).sum())
