from dataclasses import dataclass
from typing import Iterable

import numpy as np


class DuplicatePointError(ValueError):
    """Raised when two sensors share a coordinate"""

    def __init__(self, index: int, value):
        super().__init__(f"Duplicate position {value!r} at sorted index {index}")
        self.index = index
        self.value = value


def _frozen_array(values) -> np.ndarray:
    """Copy values into a read-only array (object dtype is kept for exact coordinates)"""
    array = np.array(values, copy=True)
    if array.dtype != object:
        array = array.astype(np.float64)
    array = array.reshape(-1)
    array.flags.writeable = False
    return array


def _is_exact(array: np.ndarray) -> bool:
    return array.dtype == object


@dataclass(frozen=True)
class PointSet:
    """Sensor positions on the line, strictly increasing"""
    positions: np.ndarray

    def __post_init__(self):
        positions = _frozen_array(self.positions)
        if not _is_exact(positions) and not np.all(np.isfinite(positions)):
            raise ValueError("Positions must be finite")
        if positions.size > 1:
            steps = np.diff(positions)
            bad = np.flatnonzero(~(steps > 0))
            if bad.size:
                raise ValueError(
                    f"Positions must be strictly increasing (violation at index {int(bad[0]) + 1})"
                )
        object.__setattr__(self, "positions", positions)

    @property
    def n(self) -> int:
        return int(self.positions.size)

    @property
    def exact(self) -> bool:
        """True when coordinates are stored as exact rationals"""
        return _is_exact(self.positions)

    def __len__(self) -> int:
        return self.n

    def tolist(self) -> list:
        return self.positions.tolist()


@dataclass(frozen=True)
class GapSequence:
    """Consecutive spacings X_0, X_1, ... measured from an anchor origin"""
    gaps: np.ndarray
    anchor: float = 0.0

    def __post_init__(self):
        gaps = _frozen_array(self.gaps)
        if gaps.size and not np.all(gaps > 0):
            index = int(np.flatnonzero(~(gaps > 0))[0])
            raise ValueError(f"Gap {index} is not strictly positive: {gaps[index]}")
        object.__setattr__(self, "gaps", gaps)

    def __len__(self) -> int:
        return int(self.gaps.size)

    def window(self, start: int, length: int) -> "GapSequence":
        """Sub-sequence of `length` gaps starting at `start`, anchored at its own origin"""
        if start < 0 or start + length > len(self):
            raise ValueError(f"Window [{start}, {start + length}) outside {len(self)} gaps")
        origin = self.anchor + self.gaps[:start].sum() if start else self.anchor
        return GapSequence(self.gaps[start:start + length], anchor=origin)


@dataclass(frozen=True)
class RangeAssignment:
    """Broadcast range R_i per sensor"""
    ranges: np.ndarray

    def __post_init__(self):
        ranges = _frozen_array(self.ranges)
        if ranges.size and not np.all(ranges > 0):
            raise ValueError("Broadcast ranges must be strictly positive")
        object.__setattr__(self, "ranges", ranges)

    def __len__(self) -> int:
        return int(self.ranges.size)


@dataclass(frozen=True)
class IntervalSet:
    """Closed broadcast intervals [lo_i, hi_i]"""
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = _frozen_array(self.lo)
        hi = _frozen_array(self.hi)
        if lo.size != hi.size:
            raise ValueError("Interval bounds must have equal length")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __len__(self) -> int:
        return int(self.lo.size)

    def contains(self, j: int, x) -> bool:
        """Closed membership test x ∈ I_j"""
        return bool(self.lo[j] <= x <= self.hi[j])

    def as_pairs(self) -> list:
        return list(zip(self.lo.tolist(), self.hi.tolist()))


def sort_and_validate(raw: Iterable[float]) -> PointSet:
    """
    Sort raw coordinates into a PointSet.

    Args:
        raw: Finite real coordinates in any order

    Returns:
        Strictly increasing PointSet

    Raises:
        DuplicatePointError: if two values coincide
        ValueError: if any value is NaN or infinite
    """
    values = np.asarray(list(raw), dtype=np.float64).reshape(-1)
    non_finite = np.flatnonzero(~np.isfinite(values))
    if non_finite.size:
        index = int(non_finite[0])
        raise ValueError(f"Non-finite position {float(values[index])} at input index {index}")
    array = np.sort(values)
    if array.size > 1:
        collisions = np.flatnonzero(np.diff(array) == 0)
        if collisions.size:
            index = int(collisions[0]) + 1
            raise DuplicatePointError(index, float(array[index]))
    return PointSet(array)


def gaps(p: PointSet) -> GapSequence:
    """Spacings between consecutive sensors, anchored at the first sensor"""
    if p.n == 0:
        raise ValueError("Cannot take gaps of an empty point set")
    return GapSequence(np.diff(p.positions), anchor=p.positions[0])


def from_gaps(g: GapSequence) -> PointSet:
    """
    Prefix sums of the gaps starting at the anchor.

    The anchor is the reference origin and is not itself a sensor, so the
    first sensor sits at anchor + gaps[0].
    """
    if len(g) == 0:
        return PointSet(np.empty(0))
    return PointSet(g.anchor + np.cumsum(g.gaps))


def closure_points(g: GapSequence) -> PointSet:
    """Like from_gaps, but the anchor is materialized as the leftmost sensor"""
    start = np.array([g.anchor], dtype=g.gaps.dtype if len(g) else np.float64)
    if len(g) == 0:
        return PointSet(start)
    return PointSet(np.concatenate([start, g.anchor + np.cumsum(g.gaps)]))


def assign_ranges(p: PointSet) -> RangeAssignment:
    """
    Max-neighbor range: distance from each sensor to its farther neighbor.

    The two endpoints have a single neighbor, so R_1 = x_2 - x_1 and
    R_n = x_n - x_{n-1}.
    """
    if p.n < 2:
        raise ValueError("need at least 2 points to assign ranges")
    steps = np.diff(p.positions)
    left = np.concatenate([steps[:1], steps])
    right = np.concatenate([steps, steps[-1:]])
    return RangeAssignment(np.maximum(left, right))


def broadcast_intervals(p: PointSet, r: RangeAssignment) -> IntervalSet:
    """Closed intervals [x_i - R_i, x_i + R_i]"""
    if p.n != len(r):
        raise ValueError(f"Length mismatch: {p.n} points, {len(r)} ranges")
    return IntervalSet(p.positions - r.ranges, p.positions + r.ranges)


def mirror(p: PointSet) -> PointSet:
    """Reflect the point set through the origin; index i maps to n-1-i"""
    return PointSet(-p.positions[::-1])


def transform(p: PointSet, scale: float = 1.0, shift: float = 0.0) -> PointSet:
    """Affine image {scale * x + shift} for positive scale"""
    if not scale > 0:
        raise ValueError("Scale must be positive to preserve order")
    return PointSet(p.positions * scale + shift)

