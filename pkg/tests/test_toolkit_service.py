"""
Test suite for the toolkit service commands.
"""

import json
import math

import pytest
from numpy.testing import assert_allclose

from src.cli.models import DocumentInvariantError, parse_document
from src.measure.event_algebra import SampleSpace
from src.measure.models import DomainError
from src.measure.system_model import InvalidSystemError
from src.services.toolkit_service import (
    COMMANDS, ToolkitService, UsageError, build_decoherence, parse_event, parse_partition, run,
)
from tests.conftest import DOCUMENTS, QUBIT_LABELS, document_path, load_decoherence, load_document


def service(name: str, **kwargs) -> ToolkitService:
    text = (DOCUMENTS / name).read_text(encoding="utf-8")
    return ToolkitService(parse_document(text), text, **kwargs)


class TestParsing:
    """Test event and partition arguments."""

    def setup_method(self):
        """Set up a three-history space."""
        self.space = SampleSpace.numbered(3)

    @pytest.mark.parametrize("text", ["h1,h3", "{h1,h3}", " { h3 , h1 } "])
    def test_event_syntax(self, text):
        """Test braces and whitespace are optional."""
        assert parse_event(self.space, text).to_labels() == ["h1", "h3"]

    @pytest.mark.parametrize("text", ["", "{}", "  "])
    def test_empty_event(self, text):
        """Test the empty event."""
        assert not parse_event(self.space, text)

    def test_unknown_label(self):
        """Test that unknown labels are domain errors."""
        with pytest.raises(DomainError):
            parse_event(self.space, "h1,h9")

    def test_partition(self):
        """Test cells separated by semicolons."""
        partition = parse_partition(self.space, "h2;{h1,h3}")
        assert partition.to_labels() == [["h1", "h3"], ["h2"]]

    def test_partition_must_cover(self):
        """Test that a missing history is rejected."""
        with pytest.raises(DomainError):
            parse_partition(self.space, "h1;h2")


class TestBuildDecoherence:
    """Test matrix construction from each document mode."""

    def test_conflicting_measure_entries(self):
        """Test that one event listed twice with different values is an invariant error."""
        doc = parse_document(
            '{"mode": "measure_table", "measure_table": ['
            '{"event": ["H"], "mu": 0.5}, {"event": ["H"], "mu": 0.4},'
            '{"event": ["T"], "mu": 0.5}, {"event": ["H", "T"], "mu": 1.0}]}'
        )
        with pytest.raises(DocumentInvariantError):
            build_decoherence(doc, 1e-9)

    def test_biased_coin(self):
        """Test that separate final classes give a diagonal matrix."""
        d = build_decoherence(load_document("biased_coin.json"), 1e-9)
        assert d.entries[0, 0].real == pytest.approx(0.7)
        assert d.entries[0, 1] == 0

    def test_hamiltonian_steps(self):
        """Test that exp(iXπ/4) given as H=-X, t=π/4 reproduces the qubit matrix."""
        raw = json.loads((DOCUMENTS / "qubit_three_time.json").read_text(encoding="utf-8"))
        for step in raw["steps"]:
            del step["unitary"]
            step["hamiltonian"] = [[0, -1], [-1, 0]]
            step["time"] = math.pi / 4
        d = build_decoherence(parse_document(json.dumps(raw)), 1e-9)
        assert_allclose(d.entries, load_decoherence("qubit_three_time.json").entries, atol=1e-12)

    def test_invalid_system_is_not_measured(self):
        """Test that commands other than validate refuse a system that fails validation."""
        halves = [[0.5, 0], [0, 0.5]]
        text = json.dumps({
            "mode": "system",
            "initial_state": {"vector": [1, 0]},
            "steps": [{
                "unitary": [[1, 0], [0, 1]],
                "projectors": [{"label": "0", "matrix": halves}, {"label": "1", "matrix": halves}],
            }],
        })
        svc = ToolkitService(parse_document(text), text)
        assert not svc.run("validate").results["valid"]
        with pytest.raises(InvalidSystemError) as info:
            svc.run("coevents")
        kinds = {issue.kind.value for issue in info.value.report.issues}
        assert kinds == {"non_idempotent_projector", "non_orthogonal_family"}
        assert isinstance(info.value, DomainError)


class TestCommands:
    """Test each command's results."""

    def test_validate_system(self):
        """Test the qubit's validation report and amplitudes."""
        results = service("qubit_three_time.json").run("validate").results
        assert results["valid"]
        assert results["histories"] == QUBIT_LABELS
        assert len(results["amplitudes"]) == 8
        assert results["decoherence_matrix"] == "DecoherenceMatrix(|Ω|=8, dense)"

    def test_validate_measure_table(self):
        """Test validation of a measure-table document."""
        results = service("fair_coin.json").run("validate").results
        assert results == {"valid": True, "tolerance": 1e-9, "issues": [], "histories": ["H", "T"]}

    def test_measure(self):
        """Test μ of an event and of its complement."""
        results = service("three_slit.json").run("measure", "{h1,h3}").results
        assert results["measure"] == pytest.approx(4.0)
        assert results["complement_measure"] == pytest.approx(1.0)

    def test_preclude(self):
        """Test the three-slit precluded family."""
        results = service("three_slit.json").run("preclude").results
        assert results["count"] == 2
        assert results["maximal"] == [["h1", "h2"], ["h2", "h3"]]
        assert results["covered"] == ["h1", "h2", "h3"]

    def test_zerocover(self):
        """Test the qubit's certified cover."""
        results = service("qubit_three_time.json").run("zerocover").results
        assert results["found"]
        assert results["certified"]
        assert len(results["cover"]) == 3

    def test_coevents(self):
        """Test the three-slit coevent via the lattice method."""
        results = service("three_slit.json", method="lattice").run("coevents").results
        assert results["method"] == "lattice"
        assert results["coevents"] == [["h1", "h3"]]

    def test_partition(self):
        """Test the qubit's principle partition."""
        results = service("qubit_three_time.json").run("partition").results
        assert len(results["partition"]) == 4
        assert results["finest"]
        assert all(p["homomorphic"] for p in results["placements"])

    def test_consistent(self):
        """Test a classical but interfering three-slit partition."""
        report = service("three_slit.json").run("consistent", "h1,h3;h2")
        results = report.results
        assert report.arguments == {"partition": "h1,h3;h2"}
        assert results["classical"]
        assert not results["consistent"]
        assert not results["strict_consistent"]
        assert len(results["interfering_pairs"]) == 1

    def test_predict(self):
        """Test the twenty-toss declarations."""
        results = service("fair_coin.json").run("predict", document_path("fair_coin_declared.json")).results
        assert results["copies"] == 20
        assert results["declared_count"] == 2
        [all_heads, deviation] = results["entries"]
        assert all_heads["approximately_precluded"]
        assert all_heads["size"] == 1
        assert deviation["size"] == 42
        assert deviation["measure"] == pytest.approx(42 / 2 ** 20, abs=1e-12)
        assert not deviation["approximately_precluded"]
        assert deviation["event"] == {"frequency": {"of": ["H"], "p": 0.5, "delta": 0.4}}

    def test_predict_qubit(self):
        """Test declared qubit events with one copy and the default threshold."""
        results = service("qubit_three_time.json").run("predict", document_path("qubit_declared.json")).results
        assert results["epsilon"] == 1e-6
        assert [e["approximately_precluded"] for e in results["entries"]] == [True, False]

    def test_compare(self):
        """Test the ground and excited qubit coevent sets."""
        results = service("qubit_three_time.json").run(
            "compare", document_path("qubit_three_time_excited.json")
        ).results
        assert not results["disjoint"]
        assert results["shared"] == [["001", "011"], ["100", "110"]]

    def test_compare_different_spaces(self):
        """Test that documents over different histories are not compared."""
        with pytest.raises(DomainError):
            service("three_slit.json").run("compare", document_path("fair_coin.json"))

    def test_logic(self):
        """Test the three-slit coevent's answer for h1."""
        results = service("three_slit.json").run("logic", "h1").results
        assert results["complement"] == ["h2", "h3"]
        [row] = results["answers"]
        assert row["answer"] == "Undetermined-by-complement"
        assert row["contradiction_witness"]

    def test_epsilon_override(self):
        """Test that --epsilon replaces the preclusion tolerance."""
        report = service("fair_coin.json", epsilon=0.6).run("preclude")
        assert report.tolerances["preclusion"] == 0.6
        assert report.results["count"] == 2


class TestDispatch:
    """Test command dispatch and the report envelope."""

    def test_unknown_command(self):
        """Test that unknown commands are usage errors."""
        with pytest.raises(UsageError):
            service("three_slit.json").run("simulate")

    def test_missing_argument(self):
        """Test that commands needing an argument say so."""
        with pytest.raises(UsageError):
            service("three_slit.json").run("measure")

    def test_every_command_dispatches(self):
        """Test that each listed command has a handler."""
        svc = service("three_slit.json")
        assert set(svc._handlers) == set(COMMANDS)

    def test_input_echo(self):
        """Test mode and content hash in the report."""
        text = (DOCUMENTS / "three_slit.json").read_text(encoding="utf-8")
        report = run("coevents", text)
        assert report.input["mode"] == "amplitudes"
        assert len(report.input["sha256"]) == 64
        assert set(report.tolerances) == {"validation", "preclusion", "cournot", "consistency"}
