"""
Test suite for the coevent solver.
"""

import numpy as np
import pytest
from hypothesis import given, settings

from src.coevents.coevent_solver import (
    Coevent, brute_force_coevents, coevent_sets_disjoint, is_non_preclusive, minimal_transversals,
    solve_coevents,
)
from src.coevents.preclusion import enumerate_precluded
from src.config.toolkit_config import CoeventMethod
from src.measure.event_algebra import Event
from src.measure.models import CapacityError, DomainError
from src.measure.quantum_measure import decoherence_matrix
from src.measure.system_model import random_system
from tests.conftest import diagonal_decoherence, load_decoherence, phase_tables, qubit_events

QUBIT_COEVENTS = [(2, 3), (2, 4), (3, 4), (5, 7), (5, 8), (7, 8)]
EXCITED_COEVENTS = [(1, 2), (1, 4), (2, 4), (5, 6), (5, 7), (6, 7)]


class TestMinimalTransversals:
    """Test hypergraph transversals on bitmasks."""

    def test_path_graph(self):
        """Test edges {a,b},{b,c}: transversals {b} and {a,c}."""
        assert minimal_transversals([0b011, 0b110]) == [0b010, 0b101]

    def test_single_edge(self):
        """Test that each vertex of a lone edge is a transversal."""
        assert minimal_transversals([0b1011]) == [0b0001, 0b0010, 0b1000]

    def test_no_edges(self):
        """Test that the empty set hits an empty hypergraph."""
        assert minimal_transversals([]) == [0]

    def test_empty_edge(self):
        """Test that an empty edge cannot be hit."""
        with pytest.raises(DomainError):
            minimal_transversals([0b01, 0])


class TestSolveCoevents:
    """Test the complete coevent set on known systems."""

    @pytest.mark.parametrize("method", list(CoeventMethod))
    def test_qubit(self, qubit_d, method):
        """Test the six coevents of the three-time qubit."""
        result = solve_coevents(qubit_d, method=method)
        assert result.supports() == qubit_events(qubit_d, QUBIT_COEVENTS)

    def test_qubit_excited(self):
        """Test the coevents of the qubit started in |1⟩."""
        d = load_decoherence("qubit_three_time_excited.json")
        assert solve_coevents(d).supports() == qubit_events(d, EXCITED_COEVENTS)

    @pytest.mark.parametrize("method", ["transversal", "lattice"])
    def test_three_slit(self, three_slit_d, method):
        """Test that h1 and h3 together are the only coevent."""
        result = solve_coevents(three_slit_d, method=method)
        assert result.to_labels() == [["h1", "h3"]]

    def test_no_precluded_events(self):
        """Test that every singleton is a coevent when nothing is precluded."""
        result = solve_coevents(diagonal_decoherence([1, 2, 3]))
        assert result.to_labels() == [["h1"], ["h2"], ["h3"]]

    def test_classical_limit(self):
        """Test that diagonal matrices give the non-precluded singletons."""
        d = diagonal_decoherence([0, 3, 0, 1, 2])
        result = solve_coevents(d)
        assert result.to_labels() == [["h2"], ["h4"], ["h5"]]

    def test_cap(self, qubit_d):
        """Test the enumeration cap."""
        with pytest.raises(CapacityError):
            solve_coevents(qubit_d, cap=3)

    def test_coevent_needs_support(self, qubit_d):
        """Test that the empty support is rejected."""
        with pytest.raises(DomainError):
            Coevent(Event.empty(qubit_d.space))


class TestNonPreclusive:
    """Test the non-preclusive predicate."""

    def test_qubit(self, qubit_d):
        """Test a coevent, a precluded pair and a superset."""
        family = enumerate_precluded(qubit_d)
        [coevent, precluded, superset] = qubit_events(qubit_d, [(2, 3), (1, 2), (1, 2, 3)])
        assert is_non_preclusive(coevent, family)
        assert not is_non_preclusive(precluded, family)
        assert is_non_preclusive(superset, family)

    def test_empty_event(self, qubit_d):
        """Test that ∅ is outside the predicate's domain."""
        with pytest.raises(DomainError):
            is_non_preclusive(Event.empty(qubit_d.space), enumerate_precluded(qubit_d))


class TestSolverProperties:
    """Test agreement between algorithms and structural properties."""

    @given(phase_tables(max_size=10))
    @settings(max_examples=60, deadline=None)
    def test_methods_agree_with_brute_force(self, d):
        """Test transversal, lattice and brute force give the same set."""
        transversal = solve_coevents(d, method="transversal")
        lattice = solve_coevents(d, method="lattice")
        brute = brute_force_coevents(d)
        assert transversal.to_labels() == lattice.to_labels() == brute.to_labels()

    @given(phase_tables(max_size=8))
    @settings(max_examples=40, deadline=None)
    def test_coevents_are_minimal_non_preclusive(self, d):
        """Test non-preclusiveness and minimality of each coevent, and that they form an antichain."""
        family = enumerate_precluded(d)
        result = solve_coevents(d)
        for support in result.supports():
            assert is_non_preclusive(support, family)
            for i in support:
                smaller = Event(d.space, support.mask & ~(1 << i))
                if smaller:
                    assert not is_non_preclusive(smaller, family)
        masks = sorted(result.support_masks())
        for a in masks:
            for b in masks:
                assert a == b or a & ~b != 0

    def test_existence_on_random_systems(self):
        """Test that 200 random systems all have a nonempty coevent set."""
        rng = np.random.default_rng(7)
        for trial in range(200):
            dimension = int(rng.integers(2, 5))
            steps = 1 + trial % 2 if dimension > 2 else int(rng.integers(1, 5))
            system = random_system(dimension, steps, rng, rank_one=bool(trial % 3), pure=bool(trial % 2))
            d = decoherence_matrix(system)
            assert d.size <= 16
            assert len(solve_coevents(d)) > 0

    def test_brute_force_cap(self, qubit_d):
        """Test the brute-force cap."""
        with pytest.raises(CapacityError):
            brute_force_coevents(qubit_d, cap=6)


class TestDisjointness:
    """Test comparison of coevent sets."""

    def test_ground_and_excited_share_coevents(self, qubit_d):
        """Test that the two initial states share {001,011} and {100,110}."""
        excited = load_decoherence("qubit_three_time_excited.json")
        first = solve_coevents(qubit_d)
        second = solve_coevents(excited)
        assert not coevent_sets_disjoint(first, second)
        shared = first.support_masks() & second.support_masks()
        assert shared == {e.mask for e in qubit_events(qubit_d, [(2, 4), (5, 7)])}

    def test_disjoint_sets(self):
        """Test two classical measures supported on different histories."""
        first = solve_coevents(diagonal_decoherence([1, 0]))
        second = solve_coevents(diagonal_decoherence([0, 1]))
        assert coevent_sets_disjoint(first, second)

    def test_epsilon_mismatch(self, qubit_d):
        """Test that sets computed at different ε are not compared."""
        with pytest.raises(DomainError):
            coevent_sets_disjoint(solve_coevents(qubit_d, 1e-9), solve_coevents(qubit_d, 1e-6))

    def test_space_mismatch(self, qubit_d, three_slit_d):
        """Test that sets over different spaces are not compared."""
        with pytest.raises(DomainError):
            coevent_sets_disjoint(solve_coevents(qubit_d), solve_coevents(three_slit_d))
