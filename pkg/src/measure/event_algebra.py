"""
Event algebra over a finite history space.

Histories are addressed by position in an ordered label list and events are
stored as integer bitmasks over those positions, so every Boolean operation
is a single integer operation and iteration order is always the label order.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.config.toolkit_config import get_settings
from .models import DomainError, check_capacity, describe_mismatch

logger = logging.getLogger(__name__)

PRODUCT_LABEL_SEPARATOR = ","
# used by product labels and by the command-line event and partition syntax
RESERVED_LABEL_CHARACTERS = ",;{}"
CELL_LABEL_JOINER = "+"


class HistorySpace(ABC):
    """
    A finite, ordered space of histories.

    Concrete spaces provide the size and the mapping between positions and
    labels; everything else is derived.
    """

    @property
    @abstractmethod
    def size(self) -> int:
        """Number of histories."""

    @abstractmethod
    def label(self, index: int) -> str:
        """Label of the history at position index."""

    @abstractmethod
    def index(self, label: str) -> int:
        """Position of the history with the given label."""

    @property
    def labels(self) -> Tuple[str, ...]:
        """All labels in position order."""
        return tuple(self.label(i) for i in range(self.size))

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def __len__(self) -> int:
        return self.size


@dataclass(frozen=True)
class SampleSpace(HistorySpace):
    """The history space Ω: an ordered list of distinct history names."""

    names: Tuple[str, ...]
    _positions: Dict[str, int] = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        names = tuple(str(name) for name in self.names)
        if not names:
            raise DomainError("a sample space needs at least one history")
        positions = {name: i for i, name in enumerate(names)}
        if len(positions) != len(names):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            raise DomainError(f"history labels must be unique, duplicated: {duplicates}")
        reserved = [n for n in names if any(c in n for c in RESERVED_LABEL_CHARACTERS)]
        if reserved:
            raise DomainError(
                f"history labels may not contain any of {RESERVED_LABEL_CHARACTERS!r}: {reserved}"
            )
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "_positions", positions)

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.names

    def label(self, index: int) -> str:
        return self.names[index]

    def index(self, label: str) -> int:
        try:
            return self._positions[label]
        except KeyError:
            raise DomainError(f"unknown history label {label!r}") from None

    @classmethod
    def numbered(cls, size: int, prefix: str = "h") -> "SampleSpace":
        """Space with labels h1..hN."""
        return cls(tuple(f"{prefix}{i + 1}" for i in range(size)))


@dataclass(frozen=True)
class ProductSpace(HistorySpace):
    """
    The space of n-tuples of base histories (independent identical copies).

    Tuples are ordered with the first copy as the most significant digit,
    and labelled by joining the base labels with commas.
    """

    base: SampleSpace
    copies: int

    def __post_init__(self):
        if self.copies < 1:
            raise DomainError(f"a product space needs at least one copy, got {self.copies}")

    @property
    def size(self) -> int:
        return self.base.size ** self.copies

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.base.size,) * self.copies

    def digits(self, index: int) -> Tuple[int, ...]:
        """Base-history positions of the tuple at position index."""
        if not 0 <= index < self.size:
            raise DomainError(f"history index {index} outside product space of size {self.size}")
        return tuple(int(d) for d in np.unravel_index(index, self.shape))

    def label(self, index: int) -> str:
        return PRODUCT_LABEL_SEPARATOR.join(self.base.label(d) for d in self.digits(index))

    def index(self, label: str) -> int:
        parts = label.split(PRODUCT_LABEL_SEPARATOR)
        if len(parts) != self.copies:
            raise DomainError(f"label {label!r} does not name a {self.copies}-tuple")
        return int(np.ravel_multi_index([self.base.index(p) for p in parts], self.shape))


@dataclass(frozen=True)
class Event:
    """An event: a subset of a history space, stored as a bitmask."""

    space: HistorySpace
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.space.size:
            raise DomainError(f"event mask {self.mask:#x} has bits outside [0, {self.space.size})")

    # construction

    @classmethod
    def empty(cls, space: HistorySpace) -> "Event":
        return cls(space, 0)

    @classmethod
    def full(cls, space: HistorySpace) -> "Event":
        return cls(space, space.full_mask)

    @classmethod
    def from_indices(cls, space: HistorySpace, indices: Iterable[int]) -> "Event":
        mask = 0
        for i in indices:
            if not 0 <= i < space.size:
                raise DomainError(f"history index {i} outside [0, {space.size})")
            mask |= 1 << i
        return cls(space, mask)

    @classmethod
    def from_labels(cls, space: HistorySpace, labels: Iterable[str]) -> "Event":
        return cls.from_indices(space, (space.index(label) for label in labels))

    @classmethod
    def from_indicator(cls, space: HistorySpace, indicator: np.ndarray) -> "Event":
        """Build an event from a boolean vector over positions."""
        flat = np.asarray(indicator, dtype=bool).ravel()
        if flat.size != space.size:
            raise DomainError(f"indicator has {flat.size} entries for a space of {space.size}")
        packed = np.packbits(flat, bitorder="little").tobytes()
        return cls(space, int.from_bytes(packed, "little"))

    # queries

    def __contains__(self, index: int) -> bool:
        return bool((self.mask >> index) & 1)

    def __iter__(self) -> Iterator[int]:
        mask = self.mask
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(self)

    @property
    def is_full(self) -> bool:
        return self.mask == self.space.full_mask

    def to_labels(self) -> List[str]:
        """Labels of the member histories in position order."""
        return [self.space.label(i) for i in self]

    def indicator(self) -> np.ndarray:
        """Boolean vector over positions."""
        size = self.space.size
        raw = self.mask.to_bytes((size + 7) // 8, "little")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return bits[:size].astype(bool)

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        """Report order: size first, then position order of members."""
        return (len(self), self.indices)

    def __and__(self, other: "Event") -> "Event":
        return intersection(self, other)

    def __xor__(self, other: "Event") -> "Event":
        return symmetric_difference(self, other)

    def __or__(self, other: "Event") -> "Event":
        return union(self, other)

    def __invert__(self) -> "Event":
        return complement(self)

    def __le__(self, other: "Event") -> bool:
        return is_subset(self, other)

    def __lt__(self, other: "Event") -> bool:
        return is_subset(self, other) and self.mask != other.mask

    def __str__(self) -> str:
        return "{" + ",".join(self.to_labels()) + "}"

    def cell_label(self) -> str:
        """Label of this event as one history of a coarse-grained space, e.g. h1+h3."""
        return CELL_LABEL_JOINER.join(self.to_labels())


def _same_space(a: Event, b: Event) -> None:
    if a.space != b.space:
        raise DomainError(describe_mismatch(a.space, b.space))


def symmetric_difference(a: Event, b: Event) -> Event:
    """A△B, the addition of the event algebra."""
    _same_space(a, b)
    return Event(a.space, a.mask ^ b.mask)


def intersection(a: Event, b: Event) -> Event:
    """A∩B, the multiplication of the event algebra."""
    _same_space(a, b)
    return Event(a.space, a.mask & b.mask)


def union(a: Event, b: Event) -> Event:
    _same_space(a, b)
    return Event(a.space, a.mask | b.mask)


def difference(a: Event, b: Event) -> Event:
    _same_space(a, b)
    return Event(a.space, a.mask & ~b.mask)


def complement(a: Event) -> Event:
    """Ω∖A."""
    return Event(a.space, a.space.full_mask & ~a.mask)


def is_subset(a: Event, b: Event) -> bool:
    _same_space(a, b)
    return a.mask & ~b.mask == 0


def union_all(space: HistorySpace, events: Iterable[Event]) -> Event:
    mask = 0
    for event in events:
        if event.space != space:
            raise DomainError(describe_mismatch(space, event.space))
        mask |= event.mask
    return Event(space, mask)


def is_partition(cells: Sequence[Event]) -> bool:
    """
    Check that cells are nonempty, pairwise disjoint, and cover Ω.

    Args:
        cells: Candidate cells, all over one space

    Returns:
        True iff the cells form a partition of their space
    """
    if not cells:
        return False
    space = cells[0].space
    seen = 0
    for cell in cells:
        if cell.space != space:
            raise DomainError(describe_mismatch(space, cell.space))
        if cell.mask == 0 or cell.mask & seen:
            return False
        seen |= cell.mask
    return seen == space.full_mask


@dataclass(frozen=True)
class Partition:
    """An exhaustive, exclusive list of nonempty cells."""

    cells: Tuple[Event, ...]

    def __post_init__(self):
        cells = tuple(self.cells)
        object.__setattr__(self, "cells", cells)
        if not is_partition(cells):
            raise DomainError(
                "cells do not form a partition: "
                + "; ".join(str(c) for c in cells)
            )

    @property
    def space(self) -> HistorySpace:
        return self.cells[0].space

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.cells)

    @classmethod
    def trivial(cls, space: HistorySpace) -> "Partition":
        return cls((Event.full(space),))

    @classmethod
    def discrete(cls, space: HistorySpace) -> "Partition":
        return cls(tuple(Event(space, 1 << i) for i in range(space.size)))

    @classmethod
    def from_labels(cls, space: HistorySpace, cells: Iterable[Iterable[str]]) -> "Partition":
        return cls(tuple(Event.from_labels(space, cell) for cell in cells))

    def cell_of(self, index: int) -> int:
        """Position of the cell containing history index."""
        for position, cell in enumerate(self.cells):
            if index in cell:
                return position
        raise DomainError(f"history index {index} is not covered")

    def cell_masks(self) -> frozenset:
        """Order-free identity of the partition."""
        return frozenset(cell.mask for cell in self.cells)

    def same_cells(self, other: "Partition") -> bool:
        return self.space == other.space and self.cell_masks() == other.cell_masks()

    def to_labels(self) -> List[List[str]]:
        """Cells as label arrays, ordered by their first history."""
        ordered = sorted(self.cells, key=lambda c: c.indices[0])
        return [cell.to_labels() for cell in ordered]


def coarse_grained_algebra(partition: Partition, cap: Optional[int] = None) -> List[Event]:
    """
    All 2^k unions of the k cells of a partition.

    Entry j of the result is the union of the cells whose positions are the
    set bits of j, so entry 0 is ∅ and the last entry is Ω.

    Raises:
        CapacityError: if k exceeds the enumeration cap
    """
    cap = get_settings().enumeration_cap if cap is None else cap
    k = len(partition)
    check_capacity("coarse_grained_algebra", k, cap, unit="cells")
    masks = [0]
    for cell in partition.cells:
        masks = masks + [m | cell.mask for m in masks]
    space = partition.space
    return [Event(space, m) for m in masks]


def enumerate_partitions(space: HistorySpace, cap: Optional[int] = None) -> Iterator[Partition]:
    """
    Yield every set partition of a small space (Bell-number many).

    Raises:
        CapacityError: if the space is larger than cap (default: logic cap)
    """
    cap = get_settings().logic_cap if cap is None else cap
    check_capacity("enumerate_partitions", space.size, cap)

    def grow(position: int, blocks: List[int]) -> Iterator[List[int]]:
        if position == space.size:
            yield list(blocks)
            return
        bit = 1 << position
        for b in range(len(blocks)):
            blocks[b] |= bit
            yield from grow(position + 1, blocks)
            blocks[b] &= ~bit
        blocks.append(bit)
        yield from grow(position + 1, blocks)
        blocks.pop()

    for blocks in grow(0, []):
        yield Partition(tuple(Event(space, m) for m in blocks))


def is_coarsening(coarse: Partition, fine: Partition) -> bool:
    """True iff every cell of fine lies inside a cell of coarse."""
    if coarse.space != fine.space:
        raise DomainError(describe_mismatch(coarse.space, fine.space))
    return all(
        any(cell.mask & ~big.mask == 0 for big in coarse.cells)
        for cell in fine.cells
    )
