"""
Finite-dimensional quantum systems observed at a sequence of times.

A system is an initial density matrix plus, for each measurement time, the
unitary that evolves the system up to that time and a complete family of
orthogonal projectors. Histories are outcome sequences; class operators and
amplitudes are built from them.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.stats import unitary_group

from src.config.toolkit_config import get_settings
from .event_algebra import SampleSpace
from .models import DomainError, UnsupportedModeError, check_capacity

logger = logging.getLogger(__name__)


def _frozen(matrix: Any) -> np.ndarray:
    array = np.array(matrix, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class InitialState:
    """The initial state ρ as a density matrix."""

    density: np.ndarray

    def __post_init__(self):
        density = _frozen(self.density)
        if density.ndim != 2 or density.shape[0] != density.shape[1]:
            raise DomainError(f"initial density must be square, got shape {density.shape}")
        object.__setattr__(self, "density", density)

    @classmethod
    def from_vector(cls, vector: Sequence[complex]) -> "InitialState":
        """Pure state |ψ⟩⟨ψ| from a (not necessarily normalized) vector."""
        psi = np.asarray(vector, dtype=complex).ravel()
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise DomainError("initial state vector is zero")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @property
    def dimension(self) -> int:
        return self.density.shape[0]

    def is_pure(self, tol: float) -> bool:
        purity = np.real(np.trace(self.density @ self.density))
        return abs(purity - 1.0) <= tol

    def pure_vector(self, tol: float) -> np.ndarray:
        """The unit vector |ψ₀⟩ of a rank-1 density, phase-fixed."""
        if not self.is_pure(tol):
            raise UnsupportedModeError(
                "amplitudes need a pure initial state; use the decoherence matrix for mixed states"
            )
        return representative_vector(self.density, tol)


@dataclass(frozen=True, eq=False)
class TimeStep:
    """Unitary evolution up to one measurement time, then a projector family."""

    unitary: np.ndarray
    projectors: Tuple[np.ndarray, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "unitary", _frozen(self.unitary))
        projectors = tuple(_frozen(p) for p in self.projectors)
        object.__setattr__(self, "projectors", projectors)
        labels = tuple(str(label) for label in self.labels) or tuple(
            str(i) for i in range(len(projectors))
        )
        if len(labels) != len(projectors):
            raise DomainError(
                f"{len(labels)} outcome labels for {len(projectors)} projectors"
            )
        if len(set(labels)) != len(labels):
            raise DomainError(f"outcome labels must be unique within a step: {labels}")
        object.__setattr__(self, "labels", labels)

    @property
    def outcomes(self) -> int:
        return len(self.projectors)


@dataclass(frozen=True, eq=False)
class HistoriesSystem:
    """Initial state and time steps; the source of (Ω, 𝒰, μ)."""

    initial: InitialState
    steps: Tuple[TimeStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def dimension(self) -> int:
        return self.initial.dimension

    @property
    def history_count(self) -> int:
        count = 1
        for step in self.steps:
            count *= step.outcomes
        return count


@dataclass(frozen=True)
class History:
    """One projector index per time step, first step first."""

    outcomes: Tuple[int, ...]


class IssueKind(Enum):
    """Invariant violations reported by validate_system."""
    DIMENSION_MISMATCH = "dimension_mismatch"
    NO_STEPS = "no_steps"
    NON_HERMITIAN_DENSITY = "non_hermitian_density"
    NON_POSITIVE_DENSITY = "non_positive_density"
    DENSITY_TRACE = "density_trace"
    NON_UNITARY = "non_unitary"
    NON_IDEMPOTENT_PROJECTOR = "non_idempotent_projector"
    NON_HERMITIAN_PROJECTOR = "non_hermitian_projector"
    NON_ORTHOGONAL_FAMILY = "non_orthogonal_family"
    INCOMPLETE_FAMILY = "incomplete_family"


@dataclass
class ValidationIssue:
    """A single violated invariant with its largest deviation."""
    kind: IssueKind
    location: str
    deviation: Optional[float] = None
    message: str = ""

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return {
            "kind": self.kind.value,
            "location": self.location,
            "max_deviation": self.deviation,
            "message": self.message,
        }


@dataclass
class ValidationReport:
    """Every invariant violation found in a system; empty means valid."""
    tolerance: float
    issues: List[ValidationIssue] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.issues

    def add(self, kind: IssueKind, location: str, deviation: Optional[float], message: str = "") -> None:
        self.issues.append(ValidationIssue(kind, location, deviation, message))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return {
            "valid": self.is_valid,
            "tolerance": self.tolerance,
            "issues": [issue.to_dict() for issue in self.issues],
        }


class InvalidSystemError(DomainError):
    """Exception for a system that fails validation; carries the full report."""

    def __init__(self, report: ValidationReport):
        self.report = report
        kinds = ", ".join(sorted({issue.kind.value for issue in report.issues}))
        super().__init__(f"system fails validation ({len(report.issues)} issues: {kinds})")


def _max_abs(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


def validate_system(system: HistoriesSystem, tol: Optional[float] = None) -> ValidationReport:
    """
    Check every invariant of a system and report all violations.

    Args:
        system: The system to check
        tol: Absolute, entrywise tolerance (default: validation tolerance)

    Returns:
        ValidationReport listing each violation with its max deviation
    """
    tol = get_settings().validation_tolerance if tol is None else tol
    report = ValidationReport(tolerance=tol)
    d = system.dimension
    rho = system.initial.density

    if d < 2:
        report.add(IssueKind.DIMENSION_MISMATCH, "initial_state", None, f"dimension {d} < 2")
    herm = _max_abs(rho - rho.conj().T)
    if herm > tol:
        report.add(IssueKind.NON_HERMITIAN_DENSITY, "initial_state", herm)
    else:
        lowest = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
        if lowest < -tol:
            report.add(IssueKind.NON_POSITIVE_DENSITY, "initial_state", -lowest)
    trace_dev = abs(complex(np.trace(rho)) - 1.0)
    if trace_dev > tol:
        report.add(IssueKind.DENSITY_TRACE, "initial_state", trace_dev)

    if not system.steps:
        report.add(IssueKind.NO_STEPS, "steps", None, "a system needs at least one time step")

    identity = np.eye(d)
    for t, step in enumerate(system.steps):
        where = f"steps[{t}]"
        matrices = [("unitary", step.unitary)] + [
            (f"projectors[{k}]", p) for k, p in enumerate(step.projectors)
        ]
        shapes_ok = True
        for name, matrix in matrices:
            if matrix.shape != (d, d):
                shapes_ok = False
                report.add(
                    IssueKind.DIMENSION_MISMATCH, f"{where}.{name}", None,
                    f"expected {d}x{d}, got {matrix.shape}",
                )
        if not shapes_ok:
            continue

        u = step.unitary
        unitarity = _max_abs(u.conj().T @ u - identity)
        if unitarity > tol:
            report.add(IssueKind.NON_UNITARY, f"{where}.unitary", unitarity)

        for k, p in enumerate(step.projectors):
            idem = _max_abs(p @ p - p)
            if idem > tol:
                report.add(IssueKind.NON_IDEMPOTENT_PROJECTOR, f"{where}.projectors[{k}]", idem)
            herm = _max_abs(p - p.conj().T)
            if herm > tol:
                report.add(IssueKind.NON_HERMITIAN_PROJECTOR, f"{where}.projectors[{k}]", herm)

        overlap = 0.0
        for a, b in itertools.combinations(step.projectors, 2):
            overlap = max(overlap, _max_abs(a @ b))
        if overlap > tol:
            report.add(IssueKind.NON_ORTHOGONAL_FAMILY, f"{where}.projectors", overlap)
        total = sum(step.projectors, np.zeros((d, d), dtype=complex))
        completeness = _max_abs(total - identity)
        if completeness > tol:
            report.add(IssueKind.INCOMPLETE_FAMILY, f"{where}.projectors", completeness)

    if report.issues:
        logger.info(f"System validation found {len(report.issues)} issue(s)")
    return report


def induced_sample_space(system: HistoriesSystem, cap: Optional[int] = None) -> SampleSpace:
    """
    One history per outcome sequence, labelled right-to-left.

    The first measurement's label is the rightmost character block, and
    positions count with the first step varying fastest, so a qubit measured
    three times yields 000, 001, 010, ... 111 in that order.

    Raises:
        CapacityError: if the number of histories exceeds the cap
    """
    cap = get_settings().enumeration_cap if cap is None else cap
    check_capacity("induced_sample_space", system.history_count, cap)
    labels = [
        "".join(step.labels[o] for step, o in zip(reversed(system.steps), reversed(h.outcomes)))
        for h in histories(system)
    ]
    return SampleSpace(tuple(labels))


def histories(system: HistoriesSystem) -> Iterator[History]:
    """Histories in sample-space order (first step varies fastest)."""
    ranges = [range(step.outcomes) for step in reversed(system.steps)]
    for reversed_outcomes in itertools.product(*ranges):
        yield History(tuple(reversed(reversed_outcomes)))


def class_operator(system: HistoriesSystem, history: History) -> np.ndarray:
    """
    C_h = P_n U_n ··· P_2 U_2 P_1 U_1.

    Each step's unitary is applied before that step's projector.
    """
    if len(history.outcomes) != len(system.steps):
        raise DomainError(
            f"history has {len(history.outcomes)} outcomes for {len(system.steps)} steps"
        )
    c = np.eye(system.dimension, dtype=complex)
    for step, outcome in zip(system.steps, history.outcomes):
        if not 0 <= outcome < step.outcomes:
            raise DomainError(f"outcome {outcome} invalid for a {step.outcomes}-outcome family")
        c = step.projectors[outcome] @ step.unitary @ c
    return c


def class_operators(system: HistoriesSystem) -> np.ndarray:
    """All class operators stacked in sample-space order, shape (|Ω|, d, d)."""
    d = system.dimension
    ops = np.eye(d, dtype=complex)[np.newaxis]
    for step in system.steps:
        evolved = np.stack([p @ step.unitary for p in step.projectors])
        ops = np.einsum("oij,njk->onik", evolved, ops).reshape(-1, d, d)
    return ops


def representative_vector(projector: np.ndarray, tol: float) -> np.ndarray:
    """
    Unit vector spanning a rank-1 projector (or pure density).

    Takes the column with the largest-magnitude diagonal entry, normalizes it
    and makes its first nonzero component real positive.
    """
    column = int(np.argmax(np.abs(np.diag(projector))))
    vector = np.array(projector[:, column], dtype=complex)
    vector /= np.linalg.norm(vector)
    for component in vector:
        if abs(component) > tol:
            vector *= abs(component) / component
            break
    return vector


def _is_rank_one(projector: np.ndarray, tol: float) -> bool:
    return abs(np.real(np.trace(projector)) - 1.0) <= tol


def amplitude(system: HistoriesSystem, history: History, tol: Optional[float] = None) -> complex:
    """
    α(h) = ⟨f_h| C_h |ψ₀⟩ for pure states and rank-1 projector families.

    Raises:
        UnsupportedModeError: for a mixed initial state or a projector of rank > 1
    """
    tol = get_settings().validation_tolerance if tol is None else tol
    psi = system.initial.pure_vector(tol)
    _require_rank_one(system, tol)
    final = system.steps[-1].projectors[history.outcomes[-1]]
    bra = representative_vector(final, tol).conj()
    return complex(bra @ class_operator(system, history) @ psi)


def amplitudes(system: HistoriesSystem, tol: Optional[float] = None) -> np.ndarray:
    """All amplitudes in sample-space order."""
    tol = get_settings().validation_tolerance if tol is None else tol
    psi = system.initial.pure_vector(tol)
    _require_rank_one(system, tol)
    finals = np.stack([representative_vector(p, tol) for p in system.steps[-1].projectors])
    states = class_operators(system) @ psi
    block = len(states) // len(finals)
    # the last step is the slowest-varying digit
    final_index = np.repeat(np.arange(len(finals)), block)
    return np.einsum("ni,ni->n", finals[final_index].conj(), states)


def final_classes(system: HistoriesSystem) -> List[str]:
    """Final-outcome tag of each history (histories in different classes never interfere)."""
    last = system.steps[-1]
    return [last.labels[h.outcomes[-1]] for h in histories(system)]


def _require_rank_one(system: HistoriesSystem, tol: float) -> None:
    for t, step in enumerate(system.steps):
        for k, p in enumerate(step.projectors):
            if not _is_rank_one(p, tol):
                raise UnsupportedModeError(
                    f"steps[{t}].projectors[{k}] is not rank-1; use the decoherence matrix"
                )


def unitary_from_hamiltonian(hamiltonian: Sequence[Sequence[complex]], time: float) -> np.ndarray:
    """U(t) = exp(-iHt) for a Hermitian H."""
    h = np.asarray(hamiltonian, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError(f"Hamiltonian must be square, got shape {h.shape}")
    if _max_abs(h - h.conj().T) > get_settings().validation_tolerance:
        raise DomainError("Hamiltonian is not Hermitian")
    return expm(-1j * h * time)


def random_system(
    dimension: int,
    steps: int,
    rng: np.random.Generator,
    rank_one: bool = True,
    pure: bool = True,
) -> HistoriesSystem:
    """
    A valid system with Haar-random unitaries and measurement bases.

    Args:
        dimension: Hilbert-space dimension d
        steps: Number of measurement times
        rng: Random generator (drives every draw)
        rank_one: Use rank-1 projectors; otherwise group basis vectors at random
        pure: Use a pure initial state; otherwise a random mixed density

    Returns:
        HistoriesSystem satisfying every validation invariant
    """
    if pure:
        psi = unitary_group.rvs(dimension, random_state=rng)[:, 0]
        initial = InitialState.from_vector(psi)
    else:
        g = rng.normal(size=(dimension, dimension)) + 1j * rng.normal(size=(dimension, dimension))
        rho = g @ g.conj().T
        initial = InitialState(rho / np.trace(rho))

    built = []
    for _ in range(steps):
        unitary = unitary_group.rvs(dimension, random_state=rng)
        basis = unitary_group.rvs(dimension, random_state=rng)
        if rank_one or dimension == 2:
            groups = [[i] for i in range(dimension)]
        else:
            cut = int(rng.integers(1, dimension))
            groups = [list(range(cut)), list(range(cut, dimension))]
        projectors = [basis[:, g] @ basis[:, g].conj().T for g in groups]
        built.append(TimeStep(unitary, tuple(projectors)))
    return HistoriesSystem(initial, tuple(built))
