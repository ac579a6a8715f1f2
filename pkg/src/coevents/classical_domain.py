"""
Classical partitions and consistent sets.

A partition is classical for a coevent set when every coevent support lies
inside a single cell; the coarse-grained valuation each coevent induces on
the cell algebra is then a homomorphism. The principle classical partition
is the finest such partition, obtained by merging coevents that intersect.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from src.config.toolkit_config import get_settings
from src.measure.event_algebra import (
    Event, HistorySpace, Partition, SampleSpace, coarse_grained_algebra, enumerate_partitions,
)
from src.measure.models import DomainError, check_capacity, describe_mismatch
from src.measure.quantum_measure import DecoherenceMatrix
from .coevent_solver import Coevent, CoeventSet
from .valuation_logic import TruthTable, is_homomorphism

logger = logging.getLogger(__name__)


class UnionFind:
    """Disjoint sets of history positions; each root holds its component as a bitmask."""

    def __init__(self, size: int) -> None:
        self.parent: List[int] = list(range(size))
        self.members: Dict[int, int] = {i: 1 << i for i in range(size)}

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> int:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return ri
        # the larger component absorbs the smaller
        if self.members[ri].bit_count() < self.members[rj].bit_count():
            ri, rj = rj, ri
        self.parent[rj] = ri
        self.members[ri] |= self.members.pop(rj)
        return ri

    def merge_support(self, mask: int) -> None:
        """Join every position of a bitmask into one component."""
        if not mask:
            return
        first = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        while rest:
            low = rest & -rest
            self.union(first, low.bit_length() - 1)
            rest ^= low

    def components(self) -> List[int]:
        """Component bitmasks, ordered by their lowest position."""
        return sorted(self.members.values(), key=lambda m: m & -m)


@dataclass(frozen=True)
class CoeventPlacement:
    """Where one coevent sits in a partition."""

    coevent: Coevent
    cell: Optional[Event]
    homomorphic: Optional[bool] = None
    split_across: Tuple[Event, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        result: Dict[str, Any] = {"coevent": self.coevent.to_labels()}
        if self.cell is not None:
            result["cell"] = self.cell.to_labels()
            result["homomorphic"] = self.homomorphic
        else:
            result["split_across"] = [c.to_labels() for c in self.split_across]
        return result


@dataclass(frozen=True)
class ClassicalityReport:
    """Verdict of is_classical_partition with one placement per coevent."""

    partition: Partition
    classical: bool
    placements: Tuple[CoeventPlacement, ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return {
            "partition": self.partition.to_labels(),
            "classical": self.classical,
            "placements": [p.to_dict() for p in self.placements],
        }


def _cell_space(partition: Partition) -> SampleSpace:
    return SampleSpace(tuple(cell.cell_label() for cell in partition.cells))


def induced_cell_table(coevent: Coevent, partition: Partition, cap: Optional[int] = None) -> TruthTable:
    """
    The valuation a coevent induces on the algebra generated by the cells.

    A union of cells is True iff it contains the coevent support.
    """
    cap = get_settings().homomorphism_cell_cap if cap is None else cap
    unions = coarse_grained_algebra(partition, cap)
    support = coevent.support.mask
    values = tuple(support & ~u.mask == 0 for u in unions)
    return TruthTable(_cell_space(partition), values)


def is_classical_partition(
    partition: Partition,
    coevents: CoeventSet,
    cell_cap: Optional[int] = None,
) -> ClassicalityReport:
    """
    Decide whether every coevent support lies inside one cell.

    For a classical partition with at most cell_cap cells the induced cell
    valuation of each coevent is also checked to be a homomorphism.

    Raises:
        DomainError: if partition and coevents are over different spaces
    """
    if partition.space != coevents.space:
        raise DomainError(describe_mismatch(partition.space, coevents.space))
    cell_cap = get_settings().homomorphism_cell_cap if cell_cap is None else cell_cap
    check_homomorphism = len(partition) <= cell_cap

    placements: List[CoeventPlacement] = []
    for coevent in coevents:
        support = coevent.support.mask
        home = next((c for c in partition.cells if support & ~c.mask == 0), None)
        if home is None:
            met = tuple(c for c in partition.cells if c.mask & support)
            placements.append(CoeventPlacement(coevent, None, split_across=met))
            continue
        homomorphic = None
        if check_homomorphism:
            table = induced_cell_table(coevent, partition, cell_cap)
            homomorphic = is_homomorphism(table, cell_cap)
        placements.append(CoeventPlacement(coevent, home, homomorphic))

    classical = all(p.cell is not None for p in placements)
    return ClassicalityReport(partition, classical, tuple(placements))


def principle_classical_partition(coevents: CoeventSet, space: HistorySpace) -> Partition:
    """
    The finest classical partition.

    Histories sharing a coevent are joined, so each cell is the union of one
    connected component of intersecting coevents; histories outside every
    coevent become singleton cells.
    """
    if coevents.space != space:
        raise DomainError(describe_mismatch(space, coevents.space))
    uf = UnionFind(space.size)
    for coevent in coevents:
        uf.merge_support(coevent.support.mask)
    partition = Partition(tuple(Event(space, m) for m in uf.components()))
    logger.info(f"Principle classical partition has {len(partition)} cells")
    return partition


def _submasks(cell: Event) -> np.ndarray:
    """Every subset of a cell as a global bitmask, by doubling over its members."""
    subs = np.zeros(1, dtype=np.int64)
    for i in cell:
        subs = np.concatenate([subs, subs | (1 << i)])
    return subs


def _splittable(cell: Event, contained: List[int]) -> bool:
    if len(cell) < 2:
        return False
    subs = _submasks(cell)
    lowest = cell.mask & -cell.mask
    candidates = subs[((subs & lowest) != 0) & (subs != cell.mask)]
    keeps = np.ones(candidates.shape, dtype=bool)
    for c in contained:
        inside = candidates & c
        keeps &= (inside == 0) | (inside == c)
    return bool(keeps.any())


def verify_finest(partition: Partition, coevents: CoeventSet, cap: Optional[int] = None) -> bool:
    """
    True iff the partition is classical and no classical partition refines it.

    Each multi-history cell is tried against every split into two parts that
    keeps each coevent it contains on one side.

    Raises:
        CapacityError: if a cell is larger than the cap (default: enumeration cap)
    """
    cap = get_settings().enumeration_cap if cap is None else cap
    if not is_classical_partition(partition, coevents, cell_cap=0).classical:
        return False
    for cell in partition.cells:
        check_capacity("verify_finest", len(cell), cap)
        contained = [c.support.mask for c in coevents if c.support.mask & ~cell.mask == 0]
        if _splittable(cell, contained):
            logger.debug(f"Cell {cell} admits a classical split")
            return False
    return True


def enumerate_classical_partitions(
    coevents: CoeventSet,
    cap: Optional[int] = None,
) -> Iterator[Partition]:
    """Yield every classical partition of a small space."""
    for partition in enumerate_partitions(coevents.space, cap):
        if is_classical_partition(partition, coevents, cell_cap=0).classical:
            yield partition


def cell_interference(d: DecoherenceMatrix, partition: Partition) -> np.ndarray:
    """
    Block sums B(i,j) = Σ over C_i×C_j of D.

    μ(C_i ⊔ C_j) − μ(C_i) − μ(C_j) = 2·Re B(i,j).
    """
    if partition.space != d.space:
        raise DomainError(describe_mismatch(d.space, partition.space))
    indicators = np.stack([cell.indicator() for cell in partition.cells], axis=1).astype(complex)
    return indicators.T @ d.entries @ indicators


def is_consistent_partition(
    d: DecoherenceMatrix,
    partition: Partition,
    tol: Optional[float] = None,
    strict: bool = False,
) -> bool:
    """
    No interference between any pair of cells.

    The default test is measure-level additivity, |2·Re B(i,j)| ≤ tol; strict
    mode requires the complex block sums themselves to vanish.
    """
    tol = get_settings().consistency_tolerance if tol is None else tol
    blocks = cell_interference(d, partition)
    off = ~np.eye(len(partition), dtype=bool)
    if not off.any():
        return True
    values = np.abs(blocks[off]) if strict else np.abs(2.0 * np.real(blocks[off]))
    return bool(np.max(values) <= tol)


def interfering_cell_pairs(
    d: DecoherenceMatrix,
    partition: Partition,
    tol: Optional[float] = None,
) -> List[Dict[str, Any]]:
    """Cell pairs whose measures do not combine additively, with the excess."""
    tol = get_settings().consistency_tolerance if tol is None else tol
    blocks = cell_interference(d, partition)
    pairs = []
    cells = partition.cells
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            excess = 2.0 * float(np.real(blocks[i, j]))
            if abs(excess) > tol:
                pairs.append({
                    "cells": [cells[i].to_labels(), cells[j].to_labels()],
                    "interference": excess,
                })
    return pairs
