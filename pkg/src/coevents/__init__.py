"""
Coevent layer of the quantum-measure toolkit.

Key components:
- Precluded events and zero covers
- The complete coevent set and its brute-force oracle
- Multiplicative valuations and inference checks
- Classical partitions and consistent sets
- Cournot predictions over repeated trials
"""

from .preclusion import (
    PrecludedFamily, ZeroCover, enumerate_precluded, find_zero_cover, certify_zero_cover,
)
from .coevent_solver import (
    Coevent, CoeventSet, is_non_preclusive, solve_coevents, brute_force_coevents,
    coevent_sets_disjoint,
)
from .valuation_logic import (
    Answer, Valuation, TruthTable, evaluate, is_multiplicative, characterize_multiplicative,
    is_preclusive, dominates, is_primitive, check_inference,
)
from .classical_domain import (
    ClassicalityReport, is_classical_partition, principle_classical_partition, verify_finest,
    is_consistent_partition,
)
from .prediction import (
    PredictionConfig, DeclaredEvent, approximately_precluded, product_system,
    frequency_deviation_event, cournot_report,
)

__all__ = [
    "PrecludedFamily",
    "ZeroCover",
    "enumerate_precluded",
    "find_zero_cover",
    "certify_zero_cover",
    "Coevent",
    "CoeventSet",
    "is_non_preclusive",
    "solve_coevents",
    "brute_force_coevents",
    "coevent_sets_disjoint",
    "Answer",
    "Valuation",
    "TruthTable",
    "evaluate",
    "is_multiplicative",
    "characterize_multiplicative",
    "is_preclusive",
    "dominates",
    "is_primitive",
    "check_inference",
    "ClassicalityReport",
    "is_classical_partition",
    "principle_classical_partition",
    "verify_finest",
    "is_consistent_partition",
    "PredictionConfig",
    "DeclaredEvent",
    "approximately_precluded",
    "product_system",
    "frequency_deviation_event",
    "cournot_report",
]
