"""
Test suite for toolkit settings and tolerance resolution.
"""

import pytest
from pydantic import ValidationError

from src.config.toolkit_config import (
    CoeventMethod, ToleranceKind, ToolkitSettings, get_settings, resolve_tolerances,
)


class TestToolkitSettings:
    """Test defaults and environment overrides."""

    def test_defaults(self, monkeypatch):
        """Test the documented defaults."""
        for name in ("ENUMERATION_CAP", "LOGIC_CAP", "PRECLUSION_EPSILON", "COEVENT_METHOD"):
            monkeypatch.delenv(f"QMEASURE_{name}", raising=False)
        settings = ToolkitSettings(_env_file=None)
        assert settings.enumeration_cap == 24
        assert settings.brute_force_cap == 12
        assert settings.logic_cap == 6
        assert settings.homomorphism_cell_cap == 12
        assert settings.preclusion_epsilon == 1e-9
        assert settings.cournot_epsilon == 1e-6
        assert settings.coevent_method is CoeventMethod.TRANSVERSAL

    def test_environment_override(self, monkeypatch):
        """Test that QMEASURE_* variables override defaults."""
        monkeypatch.setenv("QMEASURE_LOGIC_CAP", "4")
        monkeypatch.setenv("QMEASURE_COEVENT_METHOD", "lattice")
        monkeypatch.setenv("QMEASURE_LOG_LEVEL", "debug")
        settings = ToolkitSettings(_env_file=None)
        assert settings.logic_cap == 4
        assert settings.coevent_method is CoeventMethod.LATTICE
        assert settings.log_level == "DEBUG"

    def test_cournot_epsilon_must_be_below_one(self, monkeypatch):
        """Test that an out-of-range Cournot threshold is rejected."""
        monkeypatch.setenv("QMEASURE_COURNOT_EPSILON", "1.5")
        with pytest.raises(ValidationError):
            ToolkitSettings(_env_file=None)

    def test_get_settings_is_cached(self):
        """Test that the process settings are built once."""
        assert get_settings() is get_settings()


class TestResolveTolerances:
    """Test merging of per-run tolerance overrides."""

    def setup_method(self):
        """Set up settings with known values."""
        self.settings = ToolkitSettings(
            _env_file=None,
            validation_tolerance=1e-8,
            preclusion_epsilon=1e-7,
            cournot_epsilon=1e-3,
            consistency_tolerance=1e-6,
        )

    def test_no_overrides(self):
        """Test that settings values pass through."""
        tolerances = resolve_tolerances(None, self.settings)
        assert tolerances.validation == 1e-8
        assert tolerances.preclusion == 1e-7
        assert tolerances.cournot == 1e-3
        assert tolerances.consistency == 1e-6

    def test_overrides_and_none_values(self):
        """Test that given values win and None values are ignored."""
        tolerances = resolve_tolerances({"preclusion": 0.01, "cournot": None}, self.settings)
        assert tolerances.preclusion == 0.01
        assert tolerances.cournot == 1e-3

    def test_to_dict_names_every_kind(self):
        """Test that every tolerance kind is echoed."""
        tolerances = resolve_tolerances(None, self.settings)
        assert set(tolerances.to_dict()) == {kind.value for kind in ToleranceKind}
