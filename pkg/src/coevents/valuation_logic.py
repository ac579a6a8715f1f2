"""
Anhomomorphic valuations.

A multiplicative valuation φ_S answers True exactly for the events that
contain its support S. Truth tables are indexed by event mask, so a table
over a space of n histories has 2^n entries. Exhaustive checks over all
tables are capped by settings.logic_cap.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.config.toolkit_config import get_settings
from src.measure.event_algebra import Event, HistorySpace, complement
from src.measure.models import DomainError, check_capacity, describe_mismatch
from .preclusion import PrecludedFamily

logger = logging.getLogger(__name__)


class Answer(Enum):
    """How a valuation answers a question A together with its negation ¬A."""
    TRUE = "True"
    FALSE = "False"
    UNDETERMINED_BY_COMPLEMENT = "Undetermined-by-complement"  # A and ¬A both False


@dataclass(frozen=True)
class Valuation:
    """The multiplicative map φ_S, stored by its nonempty support S."""

    support: Event

    def __post_init__(self):
        if not self.support:
            raise DomainError("the zero map is not a valuation: support must be nonempty")

    @property
    def space(self) -> HistorySpace:
        return self.support.space


@dataclass(frozen=True, eq=False)
class TruthTable:
    """One truth value per event, indexed by event mask."""

    space: HistorySpace
    values: Tuple[bool, ...]

    def __post_init__(self):
        values = tuple(bool(v) for v in self.values)
        if len(values) != 1 << self.space.size:
            raise DomainError(
                f"a truth table over {self.space.size} histories needs {1 << self.space.size} entries"
            )
        object.__setattr__(self, "values", values)

    def __getitem__(self, event: Event) -> bool:
        return self.values[event.mask]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=bool)


@dataclass(frozen=True)
class InferenceCheck:
    """Outcome of the inference-rule checks for one valuation and event pair."""
    modus_ponens_ok: bool
    negation_rule_ok: bool
    contradiction_witness: bool

    def to_dict(self) -> Dict[str, bool]:
        """Convert to dictionary representation."""
        return {
            "modus_ponens_ok": self.modus_ponens_ok,
            "negation_rule_ok": self.negation_rule_ok,
            "contradiction_witness": self.contradiction_witness,
        }


def _check_space(v: Valuation, event: Event) -> None:
    if v.space != event.space:
        raise DomainError(describe_mismatch(v.space, event.space))


def evaluate(v: Valuation, event: Event) -> bool:
    """φ_S(A) = 1 iff S ⊆ A."""
    _check_space(v, event)
    return v.support.mask & ~event.mask == 0


def truth_table(v: Valuation, cap: Optional[int] = None) -> TruthTable:
    """The full table of φ_S."""
    cap = get_settings().logic_cap if cap is None else cap
    check_capacity("truth_table", v.space.size, cap)
    masks = np.arange(1 << v.space.size)
    return TruthTable(v.space, tuple(((v.support.mask & ~masks) == 0).tolist()))


def _table_array(table: TruthTable, cap: Optional[int], operation: str) -> np.ndarray:
    cap = get_settings().logic_cap if cap is None else cap
    check_capacity(operation, table.space.size, cap)
    return table.as_array()


def is_multiplicative(table: TruthTable, cap: Optional[int] = None) -> bool:
    """
    t(A∩B) = t(A)·t(B) for every pair of events, checked exhaustively.

    Raises:
        CapacityError: if the space exceeds the cap (default: logic cap)
    """
    t = _table_array(table, cap, "is_multiplicative")
    masks = np.arange(t.size)
    for a in range(t.size):
        if not np.array_equal(t[a & masks], t[a] & t):
            return False
    return True


def is_additive(table: TruthTable, cap: Optional[int] = None) -> bool:
    """t(A△B) = t(A) + t(B) in the two-element field, checked exhaustively."""
    t = _table_array(table, cap, "is_additive")
    masks = np.arange(t.size)
    for a in range(t.size):
        if not np.array_equal(t[a ^ masks], t[a] ^ t):
            return False
    return True


def is_homomorphism(table: TruthTable, cap: Optional[int] = None) -> bool:
    """Additive, multiplicative and true on Ω."""
    return (
        table.values[-1]
        and is_multiplicative(table, cap)
        and is_additive(table, cap)
    )


def characterize_multiplicative(table: TruthTable, cap: Optional[int] = None) -> Event:
    """
    The support of a multiplicative table: the intersection of its true events.

    Raises:
        DomainError: if the table is identically zero or not multiplicative
    """
    if not any(table.values):
        raise DomainError("identically-zero table has no support")
    if not is_multiplicative(table, cap):
        raise DomainError("table is not multiplicative")
    support = table.space.full_mask
    for mask, value in enumerate(table.values):
        if value:
            support &= mask
    v = Valuation(Event(table.space, support))
    if truth_table(v, cap).values != table.values:
        raise DomainError("table is multiplicative but not the characteristic map of its support")
    return v.support


def enumerate_multiplicative_tables(space: HistorySpace, cap: Optional[int] = None) -> List[TruthTable]:
    """
    Every multiplicative truth table over a small space, the zero table included.

    Backtracking over events in mask order: since A∩B has a mask no larger
    than A's, each new entry is constrained only by entries already fixed, and
    inconsistent prefixes are abandoned immediately.
    """
    cap = get_settings().logic_cap if cap is None else cap
    check_capacity("enumerate_multiplicative_tables", space.size, cap)
    size = 1 << space.size
    values = [False] * size
    found: List[TruthTable] = []

    def extend(mask: int) -> None:
        if mask == size:
            found.append(TruthTable(space, tuple(values)))
            return
        for choice in (False, True):
            values[mask] = choice
            if all(values[mask & other] == (choice and values[other]) for other in range(mask + 1)):
                extend(mask + 1)
        values[mask] = False

    extend(0)
    logger.debug(f"Enumerated {len(found)} multiplicative tables over {space.size} histories")
    return found


def is_preclusive(v: Valuation, family: PrecludedFamily) -> bool:
    """φ(P) = 0 for every precluded P; same as the support being non-preclusive."""
    if v.space != family.space:
        raise DomainError(describe_mismatch(family.space, v.space))
    return not any(evaluate(v, p) for p in family.maximal)


def dominates(w: Valuation, v: Valuation) -> bool:
    """w dominates v iff v(A)=1 ⇒ w(A)=1 for all A, i.e. supp(w) ⊆ supp(v)."""
    if w.space != v.space:
        raise DomainError(describe_mismatch(w.space, v.space))
    return w.support.mask & ~v.support.mask == 0


def is_primitive(v: Valuation, family: PrecludedFamily, cap: Optional[int] = None) -> bool:
    """
    Preclusive and not dominated by another preclusive valuation.

    Non-preclusive events are closed upward, so it suffices to test the
    subsets obtained by dropping one history from the support.
    """
    cap = get_settings().enumeration_cap if cap is None else cap
    check_capacity("is_primitive", v.space.size, cap)
    if not is_preclusive(v, family):
        return False
    space = v.space
    for i in v.support:
        smaller = v.support.mask & ~(1 << i)
        if smaller and is_preclusive(Valuation(Event(space, smaller)), family):
            return False
    return True


def primitive_preclusive_supports(family: PrecludedFamily, cap: Optional[int] = None) -> List[Event]:
    """
    Dual view of the coevent set: enumerate all multiplicative tables, keep the
    preclusive ones, and return the supports of those no other dominates.
    """
    preclusive: List[Valuation] = []
    for table in enumerate_multiplicative_tables(family.space, cap):
        if not any(table.values) or table.values[0]:
            continue
        v = Valuation(characterize_multiplicative(table, cap))
        if is_preclusive(v, family):
            preclusive.append(v)
    primitive = [
        v for v in preclusive
        if not any(dominates(w, v) and w.support != v.support for w in preclusive)
    ]
    return sorted((v.support for v in primitive), key=Event.sort_key)


def check_inference(v: Valuation, a: Event, b: Event) -> InferenceCheck:
    """
    Modus ponens, the negation rule, and contradiction witnesses.

    A→B is the event (¬A)∪B.
    """
    _check_space(v, a)
    _check_space(v, b)
    not_a = complement(a)
    v_a = evaluate(v, a)
    v_not_a = evaluate(v, not_a)
    v_implies = evaluate(v, not_a | b)
    v_b = evaluate(v, b)
    return InferenceCheck(
        modus_ponens_ok=not (v_a and v_implies and not v_b),
        negation_rule_ok=not (v_a and v_not_a),
        contradiction_witness=(not v_a) and (not v_not_a),
    )


def answer(v: Valuation, event: Event) -> Answer:
    """Display form of φ(A) read together with φ(¬A)."""
    if evaluate(v, event):
        return Answer.TRUE
    if evaluate(v, complement(event)):
        return Answer.FALSE
    return Answer.UNDETERMINED_BY_COMPLEMENT


def answer_table(supports: Sequence[Event], event: Event) -> List[Dict[str, object]]:
    """How each support answers A and ¬A."""
    rows = []
    for support in supports:
        v = Valuation(support)
        rows.append({
            "coevent": support.to_labels(),
            "event": evaluate(v, event),
            "complement": evaluate(v, complement(event)),
            "answer": answer(v, event).value,
        })
    return rows


def contradiction_witnesses(v: Valuation, events: Iterable[Event]) -> List[Event]:
    """Events A with φ(A) = φ(¬A) = 0."""
    return [a for a in events if check_inference(v, a, a).contradiction_witness]
