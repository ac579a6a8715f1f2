"""
Document and report models for the quantum-measure toolkit CLI.

A system document fixes μ in one of three ways: Hilbert-space data
(`system`), an amplitude table (`amplitudes`), or explicit measures of
singletons and pairs (`measure_table`). Complex numbers are written as
[re, im] pairs; a bare number is read as a real value.
"""
import itertools
import json
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple

from pydantic import (
    BaseModel, BeforeValidator, ConfigDict, Field, PositiveFloat, ValidationError, model_validator,
)

from src.measure.models import ToolkitError


class DocumentError(ToolkitError):
    """Base exception for unreadable or invalid input documents."""
    pass


class DocumentSyntaxError(DocumentError):
    """Exception for text that is not well-formed JSON."""
    pass


class DocumentSchemaError(DocumentError):
    """Exception for a document that does not match the schema."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DocumentInvariantError(DocumentSchemaError):
    """Exception for a well-typed document that breaks a cross-field rule."""
    pass


def _as_pair(value: Any) -> Any:
    if isinstance(value, bool):
        raise ValueError("booleans are not complex numbers")
    if isinstance(value, (int, float)):
        return (float(value), 0.0)
    return value


Complex = Annotated[Tuple[float, float], BeforeValidator(_as_pair)]
ComplexMatrix = List[List[Complex]]


def to_complex(pair: Tuple[float, float]) -> complex:
    return complex(pair[0], pair[1])


class ProjectorSpec(BaseModel):
    """One outcome of a measurement: its label and projector."""
    model_config = ConfigDict(extra="forbid")

    label: str = Field(..., min_length=1)
    matrix: ComplexMatrix


class StepSpec(BaseModel):
    """A unitary (or Hamiltonian and time) followed by a projector family."""
    model_config = ConfigDict(extra="forbid")

    unitary: Optional[ComplexMatrix] = None
    hamiltonian: Optional[ComplexMatrix] = None
    time: Optional[float] = None
    projectors: List[ProjectorSpec] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _one_evolution(self) -> "StepSpec":
        has_unitary = self.unitary is not None
        has_hamiltonian = self.hamiltonian is not None and self.time is not None
        if has_unitary == has_hamiltonian:
            raise ValueError("give either 'unitary' or both 'hamiltonian' and 'time'")
        if self.hamiltonian is None and self.time is not None:
            raise ValueError("'time' needs a 'hamiltonian'")
        return self


class InitialStateSpec(BaseModel):
    """The initial state as a vector or as a density matrix."""
    model_config = ConfigDict(extra="forbid")

    vector: Optional[List[Complex]] = None
    density: Optional[ComplexMatrix] = None

    @model_validator(mode="after")
    def _one_form(self) -> "InitialStateSpec":
        if (self.vector is None) == (self.density is None):
            raise ValueError("give exactly one of 'vector' or 'density'")
        return self


class AmplitudeEntry(BaseModel):
    """Amplitude of one history and its final-outcome class."""
    model_config = ConfigDict(extra="forbid")

    history_label: str = Field(..., min_length=1)
    amplitude: Complex
    final_class: str = ""


class MeasureEntry(BaseModel):
    """μ of one event given by its history labels."""
    model_config = ConfigDict(extra="forbid")

    event: List[str]
    mu: float


class TolerancesSpec(BaseModel):
    """Per-document tolerance overrides."""
    model_config = ConfigDict(extra="forbid")

    validation: Optional[PositiveFloat] = None
    preclusion: Optional[PositiveFloat] = None
    cournot: Optional[PositiveFloat] = Field(None, lt=1.0)
    consistency: Optional[PositiveFloat] = None


class SystemDocument(BaseModel):
    """Input document; exactly one payload, the one named by mode."""
    model_config = ConfigDict(extra="forbid")

    mode: Literal["system", "amplitudes", "measure_table"]
    dimension: Optional[int] = Field(None, ge=1)
    initial_state: Optional[InitialStateSpec] = None
    steps: Optional[List[StepSpec]] = None
    amplitudes: Optional[List[AmplitudeEntry]] = None
    histories: Optional[List[str]] = None
    measure_table: Optional[List[MeasureEntry]] = None
    tolerances: Optional[TolerancesSpec] = None

    def tolerance_overrides(self) -> Dict[str, Optional[float]]:
        return self.tolerances.model_dump() if self.tolerances else {}

    def history_labels(self) -> List[str]:
        """History labels for the amplitude and measure-table modes."""
        if self.mode == "amplitudes":
            return [a.history_label for a in self.amplitudes or []]
        if self.histories is not None:
            return list(self.histories)
        seen: Dict[str, None] = {}
        for entry in self.measure_table or []:
            for label in entry.event:
                seen.setdefault(label, None)
        return list(seen)


class FrequencySpec(BaseModel):
    """Relative-frequency deviation event over the product space."""
    model_config = ConfigDict(extra="forbid")

    of: List[str] = Field(..., min_length=1)
    p: float = Field(..., ge=0.0, le=1.0)
    delta: PositiveFloat


class DeclaredEventSpec(BaseModel):
    """One event named in advance, by labels, by a single sequence, or by frequency."""
    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1)
    event: Optional[List[str]] = None
    sequence: Optional[List[str]] = None
    frequency: Optional[FrequencySpec] = None

    @model_validator(mode="after")
    def _one_description(self) -> "DeclaredEventSpec":
        given = [x for x in (self.event, self.sequence, self.frequency) if x is not None]
        if len(given) != 1:
            raise ValueError("give exactly one of 'event', 'sequence' or 'frequency'")
        return self


class DeclaredEventsDocument(BaseModel):
    """Events declared before a predict run, with the number of copies."""
    model_config = ConfigDict(extra="forbid")

    copies: int = Field(1, ge=1)
    epsilon_cournot: Optional[float] = Field(None, gt=0.0, lt=1.0)
    events: List[DeclaredEventSpec] = Field(default_factory=list)


class RunReport(BaseModel):
    """Everything one command produced; deterministic unless timing is requested."""

    command: str
    arguments: Dict[str, Any] = Field(default_factory=dict)
    input: Dict[str, Any] = Field(default_factory=dict)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    results: Dict[str, Any] = Field(default_factory=dict)
    timing: Optional[Dict[str, float]] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return self.model_dump(exclude_none=True)


def _field_path(error: Dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ()))


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentSyntaxError(f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e


def _validate(model: type, data: Any) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise DocumentSchemaError(first["msg"], _field_path(first)) from e


def check_invariants(doc: SystemDocument) -> SystemDocument:
    """
    Cross-field rules the schema cannot express.

    Raises:
        DocumentInvariantError: for a missing or extra payload, duplicate or
            unresolved labels, a dimension mismatch, or a measure table without μ(Ω)
    """
    payloads = {
        "system": doc.initial_state is not None or doc.steps is not None,
        "amplitudes": doc.amplitudes is not None,
        "measure_table": doc.measure_table is not None or doc.histories is not None,
    }
    extra = [name for name, present in payloads.items() if present and name != doc.mode]
    if extra:
        raise DocumentInvariantError(
            f"mode '{doc.mode}' forbids the payload of {', '.join(extra)}", "mode"
        )

    if doc.mode == "system":
        if doc.initial_state is None or not doc.steps:
            raise DocumentInvariantError("system mode needs 'initial_state' and 'steps'", "steps")
        state = doc.initial_state
        size = len(state.vector) if state.vector is not None else len(state.density)
        if doc.dimension is not None and doc.dimension != size:
            raise DocumentInvariantError(
                f"dimension {doc.dimension} does not match the initial state ({size})", "dimension"
            )
        for t, step in enumerate(doc.steps):
            labels = [p.label for p in step.projectors]
            if len(set(labels)) != len(labels):
                raise DocumentInvariantError(
                    f"duplicate projector labels {labels}", f"steps.{t}.projectors"
                )
        return doc

    labels = doc.history_labels()
    if not labels:
        raise DocumentInvariantError(f"{doc.mode} mode needs at least one history", doc.mode)
    if len(set(labels)) != len(labels):
        raise DocumentInvariantError("history labels must be unique", doc.mode)

    if doc.mode == "measure_table":
        known = set(labels)
        full = frozenset(labels)
        given: set[frozenset[str]] = set()
        for k, entry in enumerate(doc.measure_table or []):
            unknown = [label for label in entry.event if label not in known]
            if unknown:
                raise DocumentInvariantError(
                    f"unresolved history labels {unknown}", f"measure_table.{k}.event"
                )
            given.add(frozenset(entry.event))
        if full not in given:
            raise DocumentInvariantError(
                "measure table lacks μ(Ω); normalization cannot be verified", "measure_table"
            )
        needed = [(a,) for a in labels] + list(itertools.combinations(labels, 2))
        missing = [event for event in needed if frozenset(event) not in given]
        if missing:
            shown = ", ".join("{" + ",".join(event) + "}" for event in missing)
            raise DocumentInvariantError(
                f"measure table lacks the singletons and pairs {shown}", "measure_table"
            )
    return doc


def parse_document(text: str) -> SystemDocument:
    """
    Parse and validate a system document.

    Raises:
        DocumentSyntaxError: malformed JSON
        DocumentSchemaError: schema violation, with the path of the offending field
        DocumentInvariantError: cross-field rule violation
    """
    return check_invariants(_validate(SystemDocument, _load_json(text)))


def parse_declared_events(text: str) -> DeclaredEventsDocument:
    """Parse a declared-events file for the predict command."""
    return _validate(DeclaredEventsDocument, _load_json(text))


def serialize_document(doc: SystemDocument) -> str:
    """Canonical JSON text of a document; parse_document reads it back unchanged."""
    return json.dumps(doc.model_dump(mode="json", exclude_none=True), indent=2) + "\n"
