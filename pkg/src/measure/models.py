"""
Shared error types for the quantum-measure toolkit.

Every operation raises a subclass of ToolkitError so callers (the CLI in
particular) can map failures onto exit codes without inspecting messages.
"""
from typing import Optional


class ToolkitError(Exception):
    """Base exception for toolkit errors."""
    pass


class DomainError(ToolkitError):
    """Exception for arguments outside an operation's domain."""
    pass


class CapacityError(ToolkitError):
    """Exception for exponential operations beyond the configured cap."""

    def __init__(self, operation: str, size: int, cap: int, unit: str = "histories"):
        self.operation = operation
        self.size = size
        self.cap = cap
        self.unit = unit
        super().__init__(
            f"{operation}: size {size} {unit} exceeds the enumeration cap of {cap}"
        )


class UnsupportedModeError(DomainError):
    """Exception for inputs an operation deliberately does not handle."""
    pass


class DegenerateInputError(DomainError):
    """Exception for inputs with zero total measure."""
    pass


def check_capacity(operation: str, size: int, cap: int, unit: str = "histories") -> None:
    """Raise CapacityError when size exceeds cap."""
    if size > cap:
        raise CapacityError(operation, size, cap, unit)


def describe_mismatch(left: object, right: object, what: Optional[str] = None) -> str:
    """Message used for mismatched sample spaces."""
    what = what or "sample spaces"
    return f"operands are over different {what}: {left!r} vs {right!r}"
