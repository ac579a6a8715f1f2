"""
Toolkit service: turns a parsed document and a command into a RunReport.
"""
import hashlib
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from src.cli.models import (
    DeclaredEventSpec, DocumentError, DocumentInvariantError, RunReport, SystemDocument,
    parse_declared_events, parse_document, to_complex,
)
from src.coevents.classical_domain import (
    interfering_cell_pairs, is_classical_partition, is_consistent_partition,
    principle_classical_partition, verify_finest,
)
from src.coevents.coevent_solver import CoeventSet, coevent_sets_disjoint, solve_family
from src.coevents.prediction import (
    CournotEntry, DeclaredEvent, PredictionConfig, cournot_report, frequency_deviation_event,
    product_system, sequence_event,
)
from src.coevents.preclusion import enumerate_precluded, find_zero_cover
from src.coevents.valuation_logic import Valuation, answer_table, check_inference
from src.config.toolkit_config import CoeventMethod, Tolerances, get_settings, resolve_tolerances
from src.measure.event_algebra import Event, HistorySpace, Partition, ProductSpace, SampleSpace
from src.measure.models import DomainError, ToolkitError, UnsupportedModeError
from src.measure.quantum_measure import (
    AmplitudeTable, DecoherenceMatrix, decoherence_matrix, from_amplitudes, from_measure_table,
    measure,
)
from src.measure.system_model import (
    HistoriesSystem, InitialState, InvalidSystemError, TimeStep, amplitudes, induced_sample_space,
    unitary_from_hamiltonian, validate_system,
)
from src.monitoring import metrics

logger = logging.getLogger(__name__)

COMMANDS = (
    "validate", "measure", "preclude", "zerocover", "coevents", "partition",
    "consistent", "predict", "compare", "logic",
)
# commands that take one positional argument after the command name
ARGUMENT_COMMANDS = {
    "measure": "event",
    "consistent": "partition",
    "predict": "declared_events",
    "compare": "second_document",
    "logic": "event",
}
CELL_SEPARATOR = ";"
LABEL_SEPARATOR = ","


class UsageError(ToolkitError):
    """Exception for unknown commands or missing command arguments."""
    pass


def _matrix(rows: List[List[Any]]) -> np.ndarray:
    return np.array([[to_complex(x) for x in row] for row in rows], dtype=complex)


def build_system(doc: SystemDocument) -> HistoriesSystem:
    """Hilbert-space data of a system-mode document."""
    state = doc.initial_state
    if state.vector is not None:
        initial = InitialState.from_vector([to_complex(x) for x in state.vector])
    else:
        initial = InitialState(_matrix(state.density))
    steps = []
    for step in doc.steps:
        if step.unitary is not None:
            unitary = _matrix(step.unitary)
        else:
            unitary = unitary_from_hamiltonian(_matrix(step.hamiltonian), step.time)
        steps.append(TimeStep(
            unitary,
            tuple(_matrix(p.matrix) for p in step.projectors),
            tuple(p.label for p in step.projectors),
        ))
    return HistoriesSystem(initial, tuple(steps))


def build_decoherence(doc: SystemDocument, tol: float) -> DecoherenceMatrix:
    """
    The decoherence matrix a document fixes, whichever mode it uses.

    Raises:
        InvalidSystemError: if a system-mode document fails validation
    """
    if doc.mode == "system":
        system = build_system(doc)
        report = validate_system(system, tol)
        if not report.is_valid:
            raise InvalidSystemError(report)
        return decoherence_matrix(system, tol=tol)
    space = SampleSpace(tuple(doc.history_labels()))
    if doc.mode == "amplitudes":
        table = AmplitudeTable(
            space,
            tuple(to_complex(a.amplitude) for a in doc.amplitudes),
            tuple(a.final_class for a in doc.amplitudes),
        )
        return from_amplitudes(table, tol)
    values: Dict[Event, float] = {}
    for entry in doc.measure_table:
        event = Event.from_labels(space, entry.event)
        if event in values and abs(values[event] - entry.mu) > tol:
            raise DocumentInvariantError(f"conflicting measures for {event}", "measure_table")
        values[event] = entry.mu
    return from_measure_table(space, values, tol)


def parse_event(space: HistorySpace, text: str) -> Event:
    """Comma-separated labels, optionally in braces; empty text is ∅."""
    body = text.strip().removeprefix("{").removesuffix("}").strip()
    if not body:
        return Event.empty(space)
    return Event.from_labels(space, (label.strip() for label in body.split(LABEL_SEPARATOR)))


def parse_partition(space: HistorySpace, text: str) -> Partition:
    """Cells separated by ';', each cell in event syntax."""
    cells = [parse_event(space, cell) for cell in text.split(CELL_SEPARATOR) if cell.strip()]
    return Partition(tuple(cells))


def _events_to_labels(events) -> List[List[str]]:
    return [e.to_labels() for e in events]


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e.strerror}") from e


class ToolkitService:
    """Runs one command against one document."""

    def __init__(
        self,
        document: SystemDocument,
        source_text: str = "",
        epsilon: Optional[float] = None,
        method: Optional[str] = None,
    ):
        """
        Initialize the service.

        Args:
            document: Parsed system document
            source_text: Raw document text, hashed into the report's input echo
            epsilon: Preclusion tolerance overriding document and settings
            method: Coevent algorithm overriding settings
        """
        self.document = document
        self.source_text = source_text
        overrides = dict(document.tolerance_overrides())
        if epsilon is not None:
            overrides["preclusion"] = epsilon
        self.tolerances: Tolerances = resolve_tolerances(overrides)
        self.method = CoeventMethod(method) if method else get_settings().coevent_method
        self._decoherence: Optional[DecoherenceMatrix] = None
        self._handlers: Dict[str, Callable[[Optional[str]], Dict[str, Any]]] = {
            "validate": self.validate,
            "measure": self.measure,
            "preclude": self.preclude,
            "zerocover": self.zerocover,
            "coevents": self.coevents,
            "partition": self.partition,
            "consistent": self.consistent,
            "predict": self.predict,
            "compare": self.compare,
            "logic": self.logic,
        }

    @property
    def decoherence(self) -> DecoherenceMatrix:
        if self._decoherence is None:
            self._decoherence = build_decoherence(self.document, self.tolerances.validation)
        return self._decoherence

    @property
    def space(self) -> HistorySpace:
        return self.decoherence.space

    def run(self, command: str, argument: Optional[str] = None) -> RunReport:
        """
        Dispatch a command and wrap its results in a RunReport.

        Raises:
            UsageError: for an unknown command or a missing argument
            ToolkitError: whatever the command's module raises
        """
        handler = self._handlers.get(command)
        if handler is None:
            raise UsageError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
        arguments: Dict[str, Any] = {}
        if command in ARGUMENT_COMMANDS:
            if argument is None:
                raise UsageError(f"'{command}' needs a <{ARGUMENT_COMMANDS[command]}> argument")
            arguments[ARGUMENT_COMMANDS[command]] = argument
        logger.info(f"🚀 Running {command} on a {self.document.mode} document")
        results = handler(argument)
        return RunReport(
            command=command,
            arguments=arguments,
            input=self._input_echo(),
            tolerances=self.tolerances.to_dict(),
            results=results,
        )

    def _input_echo(self) -> Dict[str, Any]:
        echo: Dict[str, Any] = {"mode": self.document.mode}
        if self.source_text:
            echo["sha256"] = hashlib.sha256(self.source_text.encode("utf-8")).hexdigest()
        return echo

    def _solve(self, d: Optional[DecoherenceMatrix] = None) -> CoeventSet:
        d = d or self.decoherence
        family = enumerate_precluded(d, self.tolerances.preclusion)
        metrics.record_scan(1 << d.size)
        result = solve_family(family, self.method)
        metrics.record_coevents(len(result))
        return result

    # commands

    def validate(self, _: Optional[str] = None) -> Dict[str, Any]:
        """Invariant report; system documents also get their amplitudes when defined."""
        tol = self.tolerances.validation
        if self.document.mode == "system":
            system = build_system(self.document)
            report = validate_system(system, tol)
            results = report.to_dict()
            if not report.is_valid:
                return results
            space = induced_sample_space(system)
            results["histories"] = list(space.labels)
            try:
                alpha = amplitudes(system, tol)
            except UnsupportedModeError as e:
                results["amplitudes_unavailable"] = str(e)
            else:
                results["amplitudes"] = [
                    {"history": label, "amplitude": complex(a)}
                    for label, a in zip(space.labels, alpha)
                ]
            results["decoherence_matrix"] = repr(self.decoherence)
            return results
        try:
            d = self.decoherence
        except DomainError as e:
            return {
                "valid": False,
                "tolerance": tol,
                "issues": [{"kind": "invalid_measure", "message": str(e)}],
            }
        return {"valid": True, "tolerance": tol, "issues": [], "histories": list(d.space.labels)}

    def measure(self, argument: Optional[str]) -> Dict[str, Any]:
        event = parse_event(self.space, argument or "")
        d = self.decoherence
        return {
            "event": event.to_labels(),
            "measure": measure(d, event, self.tolerances.validation),
            "complement_measure": measure(d, ~event, self.tolerances.validation),
        }

    def preclude(self, _: Optional[str] = None) -> Dict[str, Any]:
        family = enumerate_precluded(self.decoherence, self.tolerances.preclusion)
        metrics.record_scan(1 << self.space.size)
        return {
            "epsilon": family.epsilon,
            "count": len(family),
            "events": [
                {"event": e.to_labels(), "measure": mu}
                for e, mu in zip(family.events, family.measures)
            ],
            "maximal": _events_to_labels(family.maximal),
            "covered": family.covered().to_labels(),
        }

    def zerocover(self, _: Optional[str] = None) -> Dict[str, Any]:
        family = enumerate_precluded(self.decoherence, self.tolerances.preclusion)
        cover = find_zero_cover(family)
        if cover is None:
            return {"epsilon": family.epsilon, "found": False, "cover": [], "certified": False}
        return {
            "epsilon": family.epsilon,
            "found": True,
            "cover": _events_to_labels(cover.cover),
            "certified": cover.certify(self.decoherence),
        }

    def coevents(self, _: Optional[str] = None) -> Dict[str, Any]:
        result = self._solve()
        return {
            "epsilon": result.epsilon,
            "method": self.method.value,
            "count": len(result),
            "coevents": result.to_labels(),
        }

    def partition(self, _: Optional[str] = None) -> Dict[str, Any]:
        result = self._solve()
        principle = principle_classical_partition(result, self.space)
        report = is_classical_partition(principle, result)
        return {
            "epsilon": result.epsilon,
            "coevents": result.to_labels(),
            "partition": principle.to_labels(),
            "finest": verify_finest(principle, result),
            "placements": report.to_dict()["placements"],
        }

    def consistent(self, argument: Optional[str]) -> Dict[str, Any]:
        partition = parse_partition(self.space, argument or "")
        d = self.decoherence
        tol = self.tolerances.consistency
        result = self._solve()
        return {
            "partition": partition.to_labels(),
            "tolerance": tol,
            "consistent": is_consistent_partition(d, partition, tol),
            "strict_consistent": is_consistent_partition(d, partition, tol, strict=True),
            "interfering_pairs": interfering_cell_pairs(d, partition, tol),
            "classical": is_classical_partition(partition, result, cell_cap=0).classical,
        }

    def predict(self, argument: Optional[str]) -> Dict[str, Any]:
        declared_doc = parse_declared_events(_read(argument))
        epsilon = declared_doc.epsilon_cournot or self.tolerances.cournot
        base = self.decoherence
        if not isinstance(base.space, SampleSpace):
            raise DomainError("predict needs a plain sample space")
        d = product_system(base, declared_doc.copies)
        declared = [
            DeclaredEvent(spec.name, self._declared_event(d.space, spec))
            for spec in declared_doc.events
        ]
        cfg = PredictionConfig(epsilon, tuple(declared))
        report = cournot_report(d, None, cfg)
        entries = [
            self._entry_dict(entry, spec)
            for entry, spec in zip(report.entries, declared_doc.events)
        ]
        return {
            "copies": declared_doc.copies,
            "epsilon": report.epsilon,
            "declared_count": report.declared_count,
            "entries": entries,
            "note": report.note,
        }

    @staticmethod
    def _declared_event(space: ProductSpace, spec: DeclaredEventSpec) -> Event:
        if spec.sequence is not None:
            return sequence_event(space, spec.sequence)
        if spec.frequency is not None:
            of = Event.from_labels(space.base, spec.frequency.of)
            return frequency_deviation_event(space, of, spec.frequency.p, spec.frequency.delta)
        return Event.from_labels(space, spec.event)

    @staticmethod
    def _entry_dict(entry: CournotEntry, spec: DeclaredEventSpec) -> Dict[str, Any]:
        return {
            "name": entry.name,
            "event": spec.model_dump(exclude_none=True, exclude={"name"}),
            "size": len(entry.event),
            "measure": entry.measure,
            "epsilon": entry.epsilon,
            "approximately_precluded": entry.approximately_precluded,
        }

    def compare(self, argument: Optional[str]) -> Dict[str, Any]:
        text = _read(argument)
        other = ToolkitService(parse_document(text), text)
        other.tolerances = self.tolerances
        other.method = self.method
        first = self._solve()
        if other.space != self.space:
            raise DomainError("compared documents must share the same history labels")
        second = other._solve()
        shared = sorted(first.support_masks() & second.support_masks())
        return {
            "epsilon": first.epsilon,
            "first": first.to_labels(),
            "second": second.to_labels(),
            "disjoint": coevent_sets_disjoint(first, second),
            "shared": [Event(self.space, m).to_labels() for m in shared],
        }

    def logic(self, argument: Optional[str]) -> Dict[str, Any]:
        event = parse_event(self.space, argument or "")
        result = self._solve()
        rows = answer_table(result.supports(), event)
        for row, support in zip(rows, result.supports()):
            check = check_inference(Valuation(support), event, event)
            row["contradiction_witness"] = check.contradiction_witness
        return {
            "epsilon": result.epsilon,
            "event": event.to_labels(),
            "complement": (~event).to_labels(),
            "answers": rows,
        }


def run(
    command: str,
    document_text: str,
    argument: Optional[str] = None,
    epsilon: Optional[float] = None,
    method: Optional[str] = None,
) -> RunReport:
    """Parse a document and run one command on it."""
    document = parse_document(document_text)
    return ToolkitService(document, document_text, epsilon, method).run(command, argument)
