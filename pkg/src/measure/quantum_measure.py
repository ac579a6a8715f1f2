"""
The quantum measure μ and the decoherence matrix behind it.

μ(A) is the sum of D(h,h′) over A×A. D is built from a system's class
operators, from an amplitude table, or from a table of singleton and pair
measures; product systems keep D in Kronecker-factored form so their
measures can be evaluated without materializing |Ω|^n × |Ω|^n entries.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import reduce
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.config.toolkit_config import get_settings
from .event_algebra import Event, HistorySpace, Partition, ProductSpace, SampleSpace
from .models import (
    CapacityError, DegenerateInputError, DomainError, check_capacity, describe_mismatch,
)
from .system_model import HistoriesSystem, class_operators, induced_sample_space

logger = logging.getLogger(__name__)

# largest space whose dense matrix is ever materialized
DENSE_HISTORY_LIMIT = 4096


class DecoherenceMatrix:
    """
    Hermitian PSD matrix D(h,h′) with Σ D = 1, optionally a Kronecker power.

    The dense constructor validates every invariant; product matrices are
    assembled from an already validated base and inherit its invariants.
    """

    def __init__(self, space: HistorySpace, entries: np.ndarray, tol: Optional[float] = None):
        tol = get_settings().validation_tolerance if tol is None else tol
        matrix = np.array(entries, dtype=complex)
        if matrix.shape != (space.size, space.size):
            raise DomainError(
                f"decoherence matrix shape {matrix.shape} does not match |Ω|={space.size}"
            )
        herm = float(np.max(np.abs(matrix - matrix.conj().T)))
        if herm > tol:
            raise DomainError(f"decoherence matrix is not Hermitian (deviation {herm:.3g})")
        lowest = float(np.min(np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)))
        if lowest < -tol:
            raise DomainError(f"decoherence matrix is not positive semidefinite (eigenvalue {lowest:.3g})")
        total = complex(matrix.sum())
        if abs(total - 1.0) > tol:
            raise DomainError(f"decoherence matrix is not normalized: μ(Ω) = {total.real:.17g}")
        matrix.setflags(write=False)
        self.space = space
        self._factors: Tuple[np.ndarray, ...] = (matrix,)

    @classmethod
    def _from_factors(cls, space: HistorySpace, factors: Tuple[np.ndarray, ...]) -> "DecoherenceMatrix":
        instance = cls.__new__(cls)
        instance.space = space
        instance._factors = factors
        return instance

    @property
    def size(self) -> int:
        return self.space.size

    @property
    def factors(self) -> Tuple[np.ndarray, ...]:
        return self._factors

    @property
    def is_product(self) -> bool:
        return len(self._factors) > 1

    @property
    def entries(self) -> np.ndarray:
        """The dense matrix (Kronecker product for product systems)."""
        if not self.is_product:
            return self._factors[0]
        check_capacity("DecoherenceMatrix.entries", self.size, DENSE_HISTORY_LIMIT)
        return reduce(np.kron, self._factors)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """D @ vector, factor by factor for product systems."""
        if not self.is_product:
            return self._factors[0] @ vector
        shape = tuple(f.shape[0] for f in self._factors)
        w = np.asarray(vector, dtype=complex).reshape(shape)
        for axis, factor in enumerate(self._factors):
            w = np.moveaxis(np.tensordot(factor, w, axes=([1], [axis])), 0, axis)
        return w.ravel()

    def __repr__(self) -> str:
        kind = f"product of {len(self._factors)}" if self.is_product else "dense"
        return f"DecoherenceMatrix(|Ω|={self.size}, {kind})"


@dataclass(frozen=True, eq=False)
class AmplitudeTable:
    """One amplitude and one final-outcome tag per history."""

    space: HistorySpace
    amplitudes: Tuple[complex, ...]
    final_class: Tuple[str, ...]

    def __post_init__(self):
        amps = tuple(complex(a) for a in self.amplitudes)
        classes = tuple(str(c) for c in self.final_class) or ("",) * len(amps)
        if len(amps) != self.space.size or len(classes) != self.space.size:
            raise DomainError(
                f"amplitude table has {len(amps)} amplitudes and {len(classes)} final classes "
                f"for |Ω|={self.space.size}"
            )
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "final_class", classes)


def decoherence_matrix(
    system: HistoriesSystem,
    space: Optional[SampleSpace] = None,
    tol: Optional[float] = None,
) -> DecoherenceMatrix:
    """
    D(h,h′) = Tr(C_h ρ C_{h′}†) over all histories of a system.

    Class operators act on kets, so μ(A) = Tr(C_A ρ C_A†) and, for pure
    states, D(h,h′) = α(h)·conj(α(h′)) when h, h′ share a final outcome.
    """
    space = space or induced_sample_space(system)
    ops = class_operators(system)
    if len(ops) != space.size:
        raise DomainError(describe_mismatch(space.size, len(ops), "history counts"))
    entries = np.einsum("aij,jk,bik->ab", ops, system.initial.density, ops.conj())
    logger.debug(f"Built decoherence matrix for {space.size} histories")
    return DecoherenceMatrix(space, entries, tol)


def from_amplitudes(table: AmplitudeTable, tol: Optional[float] = None) -> DecoherenceMatrix:
    """
    D(h,h′) = α(h)·conj(α(h′)) within a final class, 0 across classes.

    The table is renormalized to μ(Ω)=1 when needed.

    Raises:
        DegenerateInputError: if the induced total measure is zero
    """
    tol = get_settings().validation_tolerance if tol is None else tol
    alpha = np.array(table.amplitudes, dtype=complex)
    classes = np.array(table.final_class, dtype=object)
    same_class = classes[:, None] == classes[None, :]
    entries = np.outer(alpha, alpha.conj()) * same_class
    total = float(np.real(entries.sum()))
    if total <= tol:
        raise DegenerateInputError(f"amplitude table has zero total measure ({total:.3g})")
    if abs(total - 1.0) > tol:
        logger.warning(f"Renormalizing amplitude table: μ(Ω) was {total:.6g}")
        entries = entries / total
    return DecoherenceMatrix(table.space, entries, tol)


def from_measure_table(
    space: SampleSpace,
    values: Mapping[Event, float],
    tol: Optional[float] = None,
) -> DecoherenceMatrix:
    """
    Rebuild D from singleton and pair measures.

    Re D(h,h) = μ(h) and Re D(h,h′) = (μ({h,h′}) − μ(h) − μ(h′))/2; imaginary
    parts never enter μ and are set to zero. Entries for larger events are
    cross-checked against the rebuilt measure.

    Raises:
        DomainError: for a missing singleton/pair/Ω value or a failed cross-check
    """
    tol = get_settings().validation_tolerance if tol is None else tol
    by_mask = {}
    for event, mu in values.items():
        if event.space != space:
            raise DomainError(describe_mismatch(space, event.space))
        by_mask[event.mask] = float(mu)
    if space.full_mask not in by_mask:
        raise DomainError("measure table lacks μ(Ω); normalization cannot be checked")

    n = space.size
    entries = np.zeros((n, n))
    for i in range(n):
        if (1 << i) not in by_mask:
            raise DomainError(f"measure table lacks μ({{{space.label(i)}}})")
        entries[i, i] = by_mask[1 << i]
    for i, j in itertools.combinations(range(n), 2):
        pair = (1 << i) | (1 << j)
        if pair not in by_mask:
            raise DomainError(f"measure table lacks μ({{{space.label(i)},{space.label(j)}}})")
        entries[i, j] = entries[j, i] = (by_mask[pair] - entries[i, i] - entries[j, j]) / 2

    d = DecoherenceMatrix(space, entries, tol)
    for mask, mu in by_mask.items():
        if mask and mask.bit_count() > 2:
            rebuilt = measure(d, Event(space, mask), tol)
            if abs(rebuilt - mu) > tol:
                raise DomainError(
                    f"measure table entry for {Event(space, mask)} is {mu:.17g} but singletons "
                    f"and pairs imply {rebuilt:.17g}"
                )
    return d


def _raw_measure(d: DecoherenceMatrix, event: Event) -> float:
    if event.space != d.space:
        raise DomainError(describe_mismatch(d.space, event.space))
    if not event:
        return 0.0
    if not d.is_product:
        idx = np.fromiter(event, dtype=np.intp)
        return float(np.real(d.entries[np.ix_(idx, idx)].sum()))
    v = event.indicator().astype(complex)
    return float(np.real(v @ d.apply(v)))


def measure(d: DecoherenceMatrix, event: Event, tol: Optional[float] = None) -> float:
    """
    μ(A) = Σ_{h,h′∈A} D(h,h′).

    Values within tol below zero clamp to 0; anything more negative means the
    matrix is not PSD and raises DomainError.
    """
    tol = get_settings().validation_tolerance if tol is None else tol
    mu = _raw_measure(d, event)
    if mu < 0.0:
        if mu < -tol:
            raise DomainError(f"negative measure {mu:.3g} for {event}")
        return 0.0
    return mu


def all_event_measures(d: DecoherenceMatrix, cap: Optional[int] = None) -> np.ndarray:
    """
    μ of every event, indexed by event mask (length 2^|Ω|).

    Built by doubling: adding history k to an event with mask m < 2^k adds
    D(k,k) plus twice the real cross terms with m.

    Raises:
        CapacityError: if |Ω| exceeds the enumeration cap
    """
    cap = get_settings().enumeration_cap if cap is None else cap
    n = d.size
    check_capacity("all_event_measures", n, cap)
    re = np.real(d.entries)
    mu = np.zeros(1)
    for k in range(n):
        cross = np.zeros(1)
        for j in range(k):
            cross = np.concatenate([cross, cross + 2.0 * re[k, j]])
        mu = np.concatenate([mu, mu + re[k, k] + cross])
    logger.debug(f"Evaluated μ on all {mu.size} events")
    return mu


def sum_rule_residual(d: DecoherenceMatrix, a: Event, b: Event, c: Event) -> float:
    """
    μ(A⊔B⊔C) − μ(A⊔B) − μ(A⊔C) − μ(B⊔C) + μ(A) + μ(B) + μ(C).

    Vanishes for every quantum measure (no three-path interference).

    Raises:
        DomainError: if the events are not pairwise disjoint
    """
    if (a & b) or (a & c) or (b & c):
        raise DomainError("sum rule needs pairwise disjoint events")
    m = lambda e: _raw_measure(d, e)  # noqa: E731
    return (
        m(a | b | c) - m(a | b) - m(a | c) - m(b | c) + m(a) + m(b) + m(c)
    )


def reconstruct_measure(
    singletons: Mapping[int, float],
    pairs: Mapping[Tuple[int, int], float],
    event: Event,
) -> float:
    """
    μ(A) = (2−n)·Σ_i μ(h_i) + ½·Σ_{i≠j} μ({h_i,h_j}) for |A| = n.

    Args:
        singletons: μ({h}) keyed by history position
        pairs: μ({h,h′}) keyed by position pairs (either order)
        event: The nonempty event A

    Raises:
        DomainError: if A is empty or a needed value is missing
    """
    members = event.indices
    if not members:
        raise DomainError("reconstruction needs a nonempty event")
    n = len(members)
    try:
        single_sum = sum(singletons[i] for i in members)
    except KeyError as missing:
        raise DomainError(f"missing singleton measure for history {missing}") from None
    pair_sum = 0.0
    for i, j in itertools.combinations(members, 2):
        if (i, j) in pairs:
            pair_sum += pairs[(i, j)]
        elif (j, i) in pairs:
            pair_sum += pairs[(j, i)]
        else:
            raise DomainError(f"missing pair measure for histories ({i}, {j})")
    # each unordered pair appears twice in Σ_{i≠j}, cancelling the ½
    return (2 - n) * single_sum + pair_sum


def singleton_and_pair_measures(
    d: DecoherenceMatrix,
) -> Tuple[Dict[int, float], Dict[Tuple[int, int], float]]:
    """μ of every singleton and every pair, in the form reconstruct_measure takes."""
    space = d.space
    singletons = {i: measure(d, Event(space, 1 << i)) for i in range(space.size)}
    pairs = {
        (i, j): measure(d, Event(space, (1 << i) | (1 << j)))
        for i, j in itertools.combinations(range(space.size), 2)
    }
    return singletons, pairs


def is_classical(d: DecoherenceMatrix, tol: Optional[float] = None) -> bool:
    """
    True iff μ is additive: |Re D(h,h′)| ≤ tol for every h ≠ h′.

    Pairwise additivity of histories extends to all disjoint events by the
    sum rule.
    """
    tol = get_settings().validation_tolerance if tol is None else tol
    re = np.real(d.entries)
    off = re - np.diag(np.diag(re))
    return bool(np.max(np.abs(off)) <= tol) if off.size else True


def coarse_grained_decoherence(d: DecoherenceMatrix, partition: Partition) -> DecoherenceMatrix:
    """
    The decoherence matrix induced on the cells of a partition.

    D′(i,j) = Σ over C_i×C_j of D; its measure on unions of cells equals μ on
    the corresponding fine-grained events.
    """
    if partition.space != d.space:
        raise DomainError(describe_mismatch(d.space, partition.space))
    full = d.entries
    k = len(partition)
    cells = [np.fromiter(cell, dtype=np.intp) for cell in partition.cells]
    entries = np.empty((k, k), dtype=complex)
    for i, j in itertools.product(range(k), repeat=2):
        entries[i, j] = full[np.ix_(cells[i], cells[j])].sum()
    space = SampleSpace(tuple(cell.cell_label() for cell in partition.cells))
    return DecoherenceMatrix(space, entries)


def product_decoherence(d: DecoherenceMatrix, copies: int, cap: Optional[int] = None) -> DecoherenceMatrix:
    """
    D_n = D ⊗ ··· ⊗ D over the n-fold product space.

    Raises:
        CapacityError: if |Ω|^n exceeds 2^cap histories
    """
    cap = get_settings().enumeration_cap if cap is None else cap
    if d.is_product or not isinstance(d.space, SampleSpace):
        raise DomainError("product systems are built from a single base space")
    space = ProductSpace(d.space, copies)
    if space.size > 1 << cap:
        raise CapacityError("product_system", space.size, 1 << cap)
    return DecoherenceMatrix._from_factors(space, (d.entries,) * copies)
