"""
Toolkit Configuration for the quantum-measure toolkit

Holds the tolerances and enumeration caps shared by every module.
Values come from QMEASURE_* environment variables or a .env file and can be
overridden per run by a system document or command-line flags.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class CoeventMethod(Enum):
    """Algorithms available for computing the complete coevent set."""
    TRANSVERSAL = "transversal"  # minimal hitting sets of complements
    LATTICE = "lattice"          # exhaustive minimal-antichain scan


class ToleranceKind(Enum):
    """Named tolerances echoed in every report."""
    VALIDATION = "validation"
    PRECLUSION = "preclusion"
    COURNOT = "cournot"
    CONSISTENCY = "consistency"


class ToolkitSettings(BaseSettings):
    """Process-wide defaults for caps and tolerances."""

    model_config = SettingsConfigDict(
        env_prefix="QMEASURE_",
        env_file=".env",
        extra="ignore",
    )

    # Enumeration caps
    enumeration_cap: int = Field(24, ge=1, description="Max |Ω| for full 2^|Ω| scans")
    brute_force_cap: int = Field(12, ge=1, description="Max |Ω| for the brute-force oracle")
    logic_cap: int = Field(6, ge=1, description="Max |Ω| for exhaustive truth tables")
    homomorphism_cell_cap: int = Field(12, ge=1, description="Max cells for homomorphism checks")

    # Tolerances (absolute, on the μ(Ω)=1 scale)
    validation_tolerance: float = Field(1e-9, gt=0.0)
    preclusion_epsilon: float = Field(1e-9, gt=0.0)
    cournot_epsilon: float = Field(1e-6, gt=0.0, lt=1.0)
    consistency_tolerance: float = Field(1e-9, gt=0.0)

    coevent_method: CoeventMethod = CoeventMethod.TRANSVERSAL
    log_level: str = "WARNING"

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, value: str) -> str:
        return value.upper()


@dataclass(frozen=True)
class Tolerances:
    """The tolerances used for one run."""
    validation: float
    preclusion: float
    cournot: float
    consistency: float

    def to_dict(self) -> Dict[str, float]:
        """Convert to dictionary representation."""
        return {
            ToleranceKind.VALIDATION.value: self.validation,
            ToleranceKind.PRECLUSION.value: self.preclusion,
            ToleranceKind.COURNOT.value: self.cournot,
            ToleranceKind.CONSISTENCY.value: self.consistency,
        }


@lru_cache(maxsize=1)
def get_settings() -> ToolkitSettings:
    """Return the cached process settings."""
    return ToolkitSettings()


def resolve_tolerances(
    overrides: Optional[Dict[str, Any]] = None,
    settings: Optional[ToolkitSettings] = None,
) -> Tolerances:
    """
    Merge per-run tolerance overrides onto the settings defaults.

    Args:
        overrides: Mapping of tolerance name to value; None values are ignored
        settings: Settings to start from (defaults to the cached settings)

    Returns:
        The resolved Tolerances
    """
    settings = settings or get_settings()
    merged = {
        ToleranceKind.VALIDATION.value: settings.validation_tolerance,
        ToleranceKind.PRECLUSION.value: settings.preclusion_epsilon,
        ToleranceKind.COURNOT.value: settings.cournot_epsilon,
        ToleranceKind.CONSISTENCY.value: settings.consistency_tolerance,
    }
    for key, value in (overrides or {}).items():
        if value is not None and key in merged:
            merged[key] = float(value)
    return Tolerances(**merged)
