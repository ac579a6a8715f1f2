"""
Histories layer of the quantum-measure toolkit.

Key components:
- Event algebra over a finite, ordered history space
- Finite-dimensional systems with class operators and amplitudes
- The quantum measure and its decoherence matrix
"""

from .models import (
    ToolkitError, DomainError, CapacityError, UnsupportedModeError, DegenerateInputError,
)
from .event_algebra import (
    HistorySpace, SampleSpace, ProductSpace, Event, Partition,
    symmetric_difference, intersection, union, difference, complement, is_subset,
    is_partition, coarse_grained_algebra, enumerate_partitions, is_coarsening,
)
from .system_model import (
    InitialState, TimeStep, HistoriesSystem, History, ValidationReport,
    induced_sample_space, class_operator, amplitude, validate_system,
)
from .quantum_measure import (
    DecoherenceMatrix, AmplitudeTable, decoherence_matrix, from_amplitudes,
    from_measure_table, measure, sum_rule_residual, reconstruct_measure, is_classical,
)

__all__ = [
    "ToolkitError",
    "DomainError",
    "CapacityError",
    "UnsupportedModeError",
    "DegenerateInputError",
    "HistorySpace",
    "SampleSpace",
    "ProductSpace",
    "Event",
    "Partition",
    "symmetric_difference",
    "intersection",
    "union",
    "difference",
    "complement",
    "is_subset",
    "is_partition",
    "coarse_grained_algebra",
    "enumerate_partitions",
    "is_coarsening",
    "InitialState",
    "TimeStep",
    "HistoriesSystem",
    "History",
    "ValidationReport",
    "induced_sample_space",
    "class_operator",
    "amplitude",
    "validate_system",
    "DecoherenceMatrix",
    "AmplitudeTable",
    "decoherence_matrix",
    "from_amplitudes",
    "from_measure_table",
    "measure",
    "sum_rule_residual",
    "reconstruct_measure",
    "is_classical",
]
