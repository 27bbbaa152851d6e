import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from models.highway import (
    GapSequence,
    IntervalSet,
    PointSet,
    assign_ranges,
    broadcast_intervals,
    from_gaps,
    mirror,
)

logger = logging.getLogger(__name__)

ALGORITHMS = ("fast", "naive")


@dataclass(frozen=True)
class InterferenceProfile:
    """Per-sensor interference Z_i together with the maximum Z_S"""
    positions: np.ndarray
    counts: np.ndarray
    max: int
    argmax: int

    @classmethod
    def from_counts(cls, p: PointSet, counts: np.ndarray) -> "InterferenceProfile":
        counts = np.asarray(counts, dtype=np.int64)
        counts.flags.writeable = False
        return cls(p.positions, counts, int(counts.max()), int(np.argmax(counts)))

    def __len__(self) -> int:
        return int(self.counts.size)

    def to_dict(self) -> Dict:
        """Convert the profile to a JSON-ready dictionary"""
        return {
            "positions": [float(x) for x in self.positions],
            "counts": self.counts.tolist(),
            "max": self.max,
            "argmax": self.argmax,
        }


@dataclass(frozen=True)
class SidedProfile:
    """One-sided interference counts; threshold None means every contributor counts"""
    counts: np.ndarray
    side: str
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"Unknown side {self.side!r}")
        if self.threshold is not None and not self.threshold > 0:
            raise ValueError("Short-range threshold must be positive")

    def __len__(self) -> int:
        return int(self.counts.size)

    @property
    def max(self) -> int:
        return int(self.counts.max()) if self.counts.size else 0


def _intervals(p: PointSet) -> IntervalSet:
    if p.n < 2:
        raise ValueError("need at least 2 points")
    return broadcast_intervals(p, assign_ranges(p))


def interference_naive(p: PointSet) -> InterferenceProfile:
    """
    Direct evaluation of Z_i = |{j != i : x_i in I_j}|.

    Quadratic in the number of sensors; kept as the reference oracle for
    interference_fast.
    """
    intervals = _intervals(p)
    x = p.positions
    counts = np.zeros(p.n, dtype=np.int64)
    for j in range(p.n):
        covered = (intervals.lo[j] <= x) & (x <= intervals.hi[j])
        covered[j] = False
        counts += covered
    return InterferenceProfile.from_counts(p, counts)


def interference_fast(p: PointSet) -> InterferenceProfile:
    """
    Interval stabbing counts in O(n log n).

    Every broadcast interval covers a contiguous run of sorted sensors, located
    by binary search. The runs are accumulated in a difference array, prefix
    summed, and each sensor's own interval is removed.
    """
    intervals = _intervals(p)
    x = p.positions
    first = np.searchsorted(x, intervals.lo, side="left")
    stop = np.searchsorted(x, intervals.hi, side="right")
    delta = np.bincount(first, minlength=p.n + 1) - np.bincount(stop, minlength=p.n + 1)
    # x_j always lies in I_j
    counts = np.cumsum(delta[:-1]) - 1
    if p.exact:
        logger.debug("Counted %d sensors with exact coordinates", p.n)
    return InterferenceProfile.from_counts(p, counts)


def compute_profile(p: PointSet, algo: str = "fast") -> InterferenceProfile:
    """Dispatch to one of the two engines by name"""
    if algo == "fast":
        return interference_fast(p)
    if algo == "naive":
        return interference_naive(p)
    raise ValueError(f"Unknown algorithm {algo!r}; expected one of {', '.join(ALGORITHMS)}")


def max_interference(p: PointSet) -> int:
    """Maximum interference Z_S of the point set"""
    return interference_fast(p).max


def _left_counts(p: PointSet, intervals: IntervalSet, eligible: np.ndarray) -> np.ndarray:
    # contributor i covers the sensors i+1 .. stop_i-1 on its right
    stop = np.searchsorted(p.positions, intervals.hi, side="right")
    start = np.arange(1, p.n + 1)
    delta = (
        np.bincount(start[eligible], minlength=p.n + 1)
        - np.bincount(stop[eligible], minlength=p.n + 1)
    )
    return np.cumsum(delta[:-1])


def left_interference(p: PointSet) -> SidedProfile:
    """
    Left-interference: for each x_t, the number of x_i < x_t whose interval reaches x_t.

    The test x_t - x_i <= R_i is evaluated as x_t <= x_i + R_i so that left and
    right counts add up to interference_fast exactly.
    """
    intervals = _intervals(p)
    counts = _left_counts(p, intervals, np.ones(p.n, dtype=bool))
    return SidedProfile(counts, "left")


def right_interference(p: PointSet) -> SidedProfile:
    """Mirror image of left_interference"""
    reflected = left_interference(mirror(p))
    return SidedProfile(reflected.counts[::-1].copy(), "right")


def _short_range_setup(g: GapSequence, threshold: float):
    if len(g) < 2:
        raise ValueError("need at least 2 gaps")
    if not threshold > 0:
        raise ValueError("Short-range threshold must be positive")
    p = from_gaps(g)
    # sensor i sits right after gap i, so gaps[i] is its left gap
    eligible = np.asarray(g.gaps <= threshold, dtype=bool)
    return p, _intervals(p), eligible


def short_range_left_interference(g: GapSequence, threshold: float = 1.0) -> SidedProfile:
    """
    Left-interference restricted to contributors whose left gap is at most `threshold`.

    For the first sensor the left gap is the gap from the anchor.
    """
    p, intervals, eligible = _short_range_setup(g, threshold)
    counts = _left_counts(p, intervals, eligible)
    return SidedProfile(counts, "left", threshold)


def short_range_left_interference_at(g: GapSequence, x: float, threshold: float = 1.0) -> int:
    """Short-range left-interference of an arbitrary point x of the line"""
    p, intervals, eligible = _short_range_setup(g, threshold)
    hits = (p.positions < x) & (x <= intervals.hi) & eligible
    return int(np.count_nonzero(hits))


def max_short_range_left_interference(g: GapSequence, threshold: float = 1.0) -> int:
    """
    Maximum short-range left-interference over every point of the line.

    The count at x is #{x_i < x} - #{hi_i < x} over eligible contributors, a
    step function that peaks at some hi_i, so only those are evaluated.
    """
    p, intervals, eligible = _short_range_setup(g, threshold)
    if not eligible.any():
        return 0
    starts = np.sort(p.positions[eligible])
    ends = np.sort(intervals.hi[eligible])
    candidates = intervals.hi[eligible]
    counts = (
        np.searchsorted(starts, candidates, side="left")
        - np.searchsorted(ends, candidates, side="left")
    )
    return int(counts.max())
