"""
Shared fixtures and strategies for the quantum-measure toolkit tests.
"""
from pathlib import Path
from typing import List, Sequence

import numpy as np
import pytest
from hypothesis import assume
from hypothesis import strategies as st

from src.cli.models import SystemDocument, parse_document
from src.measure.event_algebra import Event, SampleSpace
from src.measure.quantum_measure import AmplitudeTable, DecoherenceMatrix, from_amplitudes
from src.services.toolkit_service import build_decoherence

DOCUMENTS = Path(__file__).resolve().parent.parent / "src" / "cli" / "documents"

# h1..h8 of the three-time qubit, in sample-space order
QUBIT_LABELS = ["000", "001", "010", "011", "100", "101", "110", "111"]


def document_path(name: str) -> str:
    return str(DOCUMENTS / name)


def load_document(name: str) -> SystemDocument:
    return parse_document((DOCUMENTS / name).read_text(encoding="utf-8"))


def load_decoherence(name: str) -> DecoherenceMatrix:
    return build_decoherence(load_document(name), 1e-9)


def qubit_event(d: DecoherenceMatrix, *numbers: int) -> Event:
    """Event of the qubit example from history numbers 1..8."""
    return Event.from_labels(d.space, [QUBIT_LABELS[k - 1] for k in numbers])


def qubit_events(d: DecoherenceMatrix, groups: Sequence[Sequence[int]]) -> List[Event]:
    return [qubit_event(d, *g) for g in groups]


def amplitude_decoherence(amplitudes: Sequence[complex], classes: Sequence[str] = ()) -> DecoherenceMatrix:
    """Decoherence matrix of an amplitude table over h1..hN."""
    space = SampleSpace.numbered(len(amplitudes))
    classes = tuple(classes) or ("",) * len(amplitudes)
    return from_amplitudes(AmplitudeTable(space, tuple(amplitudes), classes))


def diagonal_decoherence(weights: Sequence[float]) -> DecoherenceMatrix:
    w = np.asarray(weights, dtype=float)
    space = SampleSpace.numbered(len(w))
    return DecoherenceMatrix(space, np.diag(w / w.sum()))


@st.composite
def phase_tables(draw, min_size: int = 1, max_size: int = 6) -> DecoherenceMatrix:
    """
    Amplitude tables with entries in {±1, ±i} and up to three final classes.

    Such tables produce many exactly-zero measures, so precluded events,
    zero covers and non-singleton coevents are common.
    """
    n = draw(st.integers(min_value=min_size, max_value=max_size))
    amps = draw(st.lists(st.sampled_from([1, -1, 1j, -1j]), min_size=n, max_size=n))
    classes = draw(st.lists(st.sampled_from(["a", "b", "c"]), min_size=n, max_size=n))
    total = 0.0
    for c in set(classes):
        total += abs(sum(a for a, k in zip(amps, classes) if k == c)) ** 2
    assume(total > 0.5)
    return amplitude_decoherence(amps, classes)


@pytest.fixture
def qubit_d() -> DecoherenceMatrix:
    return load_decoherence("qubit_three_time.json")


@pytest.fixture
def three_slit_d() -> DecoherenceMatrix:
    return load_decoherence("three_slit.json")


@pytest.fixture
def fair_coin_d() -> DecoherenceMatrix:
    return load_decoherence("fair_coin.json")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)
