"""
Test suite for precluded events and zero covers.
"""

import numpy as np
import pytest
from hypothesis import given, settings

from src.coevents.preclusion import (
    certify_zero_cover, enumerate_precluded, find_zero_cover, singleton_covered, superset_counts,
)
from src.measure.event_algebra import Event
from src.measure.models import CapacityError
from src.measure.quantum_measure import all_event_measures, measure
from tests.conftest import diagonal_decoherence, phase_tables, qubit_event, qubit_events

QUBIT_PAIRS = [(1, 2), (1, 3), (1, 4), (5, 6), (6, 7), (6, 8)]
QUBIT_FOUR_SETS = [a + b for a in QUBIT_PAIRS[:3] for b in QUBIT_PAIRS[3:]]


class TestEnumeratePrecluded:
    """Test the precluded family and its maximal members."""

    def test_qubit_precluded_events(self, qubit_d):
        """Test that the qubit has exactly the six pairs and nine four-sets."""
        family = enumerate_precluded(qubit_d)
        expected = {e.mask for e in qubit_events(qubit_d, QUBIT_PAIRS + QUBIT_FOUR_SETS)}
        assert {e.mask for e in family.events} == expected
        assert len(family) == 15
        assert all(mu <= 1e-12 for mu in family.measures)

    def test_qubit_maximal_events(self, qubit_d):
        """Test that the four-sets are the maximal precluded events."""
        family = enumerate_precluded(qubit_d)
        assert {e.mask for e in family.maximal} == {
            e.mask for e in qubit_events(qubit_d, QUBIT_FOUR_SETS)
        }

    def test_report_order(self, qubit_d):
        """Test that events are ordered by size, then by position."""
        family = enumerate_precluded(qubit_d)
        assert family.events[0] == qubit_event(qubit_d, 1, 2)
        assert [len(e) for e in family.events] == [2] * 6 + [4] * 9

    def test_three_slit(self, three_slit_d):
        """Test the two precluded pairs of the three-slit table."""
        family = enumerate_precluded(three_slit_d)
        assert [e.to_labels() for e in family.events] == [["h1", "h2"], ["h2", "h3"]]
        assert family.covered().is_full

    def test_nothing_precluded(self):
        """Test a strictly positive classical measure."""
        family = enumerate_precluded(diagonal_decoherence([1, 2, 3]))
        assert len(family) == 0
        assert not family.maximal
        assert singleton_covered(family) == []

    def test_epsilon_widens_family(self):
        """Test that a larger ε admits small-measure events."""
        d = diagonal_decoherence([1, 1000])
        assert len(enumerate_precluded(d, epsilon=1e-9)) == 0
        assert [e.to_labels() for e in enumerate_precluded(d, epsilon=0.01).events] == [["h1"]]

    def test_cap(self, qubit_d):
        """Test the enumeration cap."""
        with pytest.raises(CapacityError):
            enumerate_precluded(qubit_d, cap=5)

    @given(phase_tables(max_size=8))
    @settings(max_examples=40, deadline=None)
    def test_maximal_is_antichain_of_family(self, d):
        """Test that maximal events are precluded, pairwise incomparable and dominate the family."""
        family = enumerate_precluded(d)
        maximal = family.maximal
        for m in maximal:
            assert m in family
        for a in maximal:
            for b in maximal:
                if a != b:
                    assert not a <= b
        for event in family.events:
            assert any(event <= m for m in maximal)
            assert measure(d, event) <= 1e-9


class TestSupersetCounts:
    """Test the sum-over-supersets transform."""

    def test_counts(self):
        """Test counts on a three-bit lattice."""
        flags = np.zeros(8, dtype=bool)
        flags[[0b011, 0b111]] = True
        counts = superset_counts(flags, 3)
        assert counts[0b000] == 2
        assert counts[0b001] == 2
        assert counts[0b011] == 2
        assert counts[0b100] == 1
        assert counts[0b111] == 1


class TestZeroCover:
    """Test zero cover search and certification."""

    def test_qubit_cover_found_and_certified(self, qubit_d):
        """Test that the qubit has a certified zero cover."""
        cover = find_zero_cover(enumerate_precluded(qubit_d))
        assert cover is not None
        assert cover.certify(qubit_d)
        assert len(cover.cover) == 3

    def test_six_pair_cover_verifies(self, qubit_d):
        """Test that the six precluded pairs cover Ω."""
        assert certify_zero_cover(qubit_events(qubit_d, QUBIT_PAIRS), qubit_d)

    def test_certify_rejects_non_cover(self, qubit_d):
        """Test that a partial union or a non-precluded member fails."""
        assert not certify_zero_cover(qubit_events(qubit_d, QUBIT_PAIRS[:3]), qubit_d)
        members = qubit_events(qubit_d, QUBIT_PAIRS) + [qubit_event(qubit_d, 2, 3)]
        assert not certify_zero_cover(members, qubit_d)
        assert not certify_zero_cover([], qubit_d)

    def test_three_slit_cover(self, three_slit_d):
        """Test that both precluded pairs are needed."""
        cover = find_zero_cover(enumerate_precluded(three_slit_d))
        assert [e.to_labels() for e in cover.cover] == [["h1", "h2"], ["h2", "h3"]]

    def test_no_cover(self):
        """Test that an uncovered history means no cover."""
        d = diagonal_decoherence([1, 2])
        assert find_zero_cover(enumerate_precluded(d)) is None

    @given(phase_tables(max_size=8))
    @settings(max_examples=40, deadline=None)
    def test_cover_is_irredundant(self, d):
        """Test that found covers certify and lose coverage when any member is dropped."""
        family = enumerate_precluded(d)
        cover = find_zero_cover(family)
        if cover is None:
            assert not family.covered().is_full
            return
        assert cover.certify(d)
        for skip in range(len(cover.cover)):
            rest = [e for k, e in enumerate(cover.cover) if k != skip]
            mask = 0
            for e in rest:
                mask |= e.mask
            assert mask != d.space.full_mask

    def test_covered_histories_have_no_singleton_reality(self, qubit_d):
        """Test that every qubit history lies in a precluded event."""
        family = enumerate_precluded(qubit_d)
        assert singleton_covered(family) == list(range(8))
        table = all_event_measures(qubit_d)
        assert table[Event.full(qubit_d.space).mask] == pytest.approx(1.0)
