import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from models.generators import DEFAULT_SEED, Seed, as_seed, exponential_draws, exponential_gaps
from models.highway import GapSequence, closure_points, from_gaps
from models.interference import interference_fast, max_interference
from models.monte_carlo import binomial_ci95

logger = logging.getLogger(__name__)

FRAME_MODES = ("sliding", "disjoint")

# Rows of exponential tuples drawn per stream when estimating frame frequency
CHUNK_ROWS = 1 << 20


@dataclass(frozen=True)
class FrameReport:
    """Starts of the k-frames found in a gap sequence"""
    k: int
    starts: Tuple[int, ...]
    mode: str
    probability_bound: float
    empirical_probability: Optional[float] = None
    trials: Optional[int] = None

    @property
    def count(self) -> int:
        return len(self.starts)

    def to_dict(self) -> Dict:
        return {
            "k": self.k,
            "mode": self.mode,
            "count": self.count,
            "starts": list(self.starts),
            "probability_bound": self.probability_bound,
            "empirical_probability": self.empirical_probability,
            "trials": self.trials,
        }


@dataclass(frozen=True)
class FrameEstimate:
    """Monte Carlo frequency of k-frames among i.i.d. Exponential(1) tuples"""
    k: int
    trials: int
    successes: int
    bound: float
    ci95: Tuple[float, float]

    @property
    def empirical(self) -> float:
        return self.successes / self.trials

    @property
    def standard_error(self) -> float:
        p = self.empirical
        return math.sqrt(p * (1 - p) / self.trials)

    def to_dict(self) -> Dict:
        return {
            "k": self.k,
            "bound": self.bound,
            "empirical": self.empirical,
            "trials": self.trials,
            "ci95": list(self.ci95),
        }


@dataclass(frozen=True)
class LowerBoundParameters:
    """Frame order guaranteed with high probability for n sensors and tail parameter c"""
    n: int
    c: float
    k: int
    failure_probability_bound: float
    proof_failure_bound: float

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "c": self.c,
            "k": self.k,
            "failure_probability_bound": self.failure_probability_bound,
            "proof_failure_bound": self.proof_failure_bound,
        }


@dataclass(frozen=True)
class LowerBoundEstimate:
    """How often a disjoint-block k-frame, and interference k, show up in practice"""
    parameters: LowerBoundParameters
    trials: int
    frame_fraction: float
    reach_fraction: float
    z_max: Tuple[int, ...] = field(repr=False, default=())

    @property
    def guaranteed_fraction(self) -> float:
        return 1.0 - self.parameters.failure_probability_bound

    def to_dict(self) -> Dict:
        return {
            "trials": self.trials,
            "frame_fraction": self.frame_fraction,
            "reach_fraction": self.reach_fraction,
            "guaranteed_fraction": self.guaranteed_fraction,
        }


def _as_gaps(window) -> np.ndarray:
    if isinstance(window, GapSequence):
        return window.gaps
    return np.asarray(window, dtype=np.float64).reshape(-1)


def frame_mask(windows: np.ndarray) -> np.ndarray:
    """
    Row-wise frame predicate for a 2-D array of gap windows.

    A row X_0..X_k is a frame when 1 <= X_0 <= 2 and
    X_{i-1}/4 <= X_i <= X_{i-1}/2 for every i >= 1.
    """
    windows = np.atleast_2d(windows)
    first = windows[:, 0]
    mask = (first >= 1.0) & (first <= 2.0)
    previous = windows[:, :-1]
    current = windows[:, 1:]
    steps = (current >= previous / 4) & (current <= previous / 2)
    return mask & steps.all(axis=1)


def is_frame(window) -> bool:
    """Whether the gap window X_0..X_k forms a k-frame"""
    values = _as_gaps(window)
    if values.size == 0:
        raise ValueError("Frame window must not be empty")
    return bool(frame_mask(values[np.newaxis, :])[0])


def frame_envelope_holds(window) -> bool:
    """Inside a frame gap i lies in [4^-i, 2^(1-i)]"""
    values = _as_gaps(window)
    i = np.arange(values.size, dtype=np.float64)
    # X_0 <= 2, so the upper edge is 2^(1-i)
    return bool(np.all((values >= 4.0 ** -i) & (values <= 2.0 ** (1 - i))))


def scan_frames(
    g: GapSequence, k: int, mode: str = "sliding", estimate: Optional[FrameEstimate] = None
) -> FrameReport:
    """
    Find every k-frame in a gap sequence.

    The disjoint mode inspects the blocks X_{jk}..X_{jk+k} only; the sliding
    mode inspects every start. A Monte Carlo estimate of the same order, when
    given, is attached to the report.
    """
    if k < 1:
        raise ValueError("Frame order k must be at least 1")
    if estimate is not None and estimate.k != k:
        raise ValueError(f"Estimate is for {estimate.k}-frames, not {k}-frames")
    if mode not in FRAME_MODES:
        raise ValueError(f"Unknown scan mode {mode!r}; expected one of {', '.join(FRAME_MODES)}")
    if len(g) < k + 1:
        raise ValueError(f"need at least {k + 1} gaps to scan for {k}-frames, got {len(g)}")
    windows = np.lib.stride_tricks.sliding_window_view(np.asarray(g.gaps, dtype=np.float64), k + 1)
    candidates = np.arange(windows.shape[0])
    if mode == "disjoint":
        candidates = candidates[::k]
    hits = candidates[frame_mask(windows[candidates])]
    return FrameReport(
        k,
        tuple(int(s) for s in hits),
        mode,
        frame_probability_bound(k),
        empirical_probability=None if estimate is None else estimate.empirical,
        trials=None if estimate is None else estimate.trials,
    )


def frame_interference_witness(g: GapSequence, start: int, k: int) -> int:
    """
    Interference at the sensor right after the k-frame starting at gap `start`.

    The sensor at the origin of the frame's first gap takes part (for start 0
    that is the anchor), so each of the k frame sensors has its left gap as
    range and reaches the post-frame sensor: the result is at least k.
    """
    if start < 0 or start + k + 1 > len(g):
        raise ValueError(f"Frame window [{start}, {start + k + 1}) outside {len(g)} gaps")
    if not is_frame(g.gaps[start:start + k + 1]):
        raise ValueError(f"Gaps {start}..{start + k} do not form a {k}-frame")
    profile = interference_fast(closure_points(g))
    return int(profile.counts[start + k + 1])


def frame_probability_bound(k: int) -> float:
    """Lower bound 2^-(k+2)^2 on the chance that k+1 exponentials form a k-frame"""
    if k < 0:
        raise ValueError("Frame order k must be nonnegative")
    return 2.0 ** -((k + 2) ** 2)


def frame_probability_product_bound(k: int) -> float:
    """The sharper bound e^-1 (1 - e^-1) 2^-(k^2 + 2k) behind frame_probability_bound"""
    if k < 0:
        raise ValueError("Frame order k must be nonnegative")
    return math.exp(-1) * (1 - math.exp(-1)) * 2.0 ** -(k * k + 2 * k)


def random_frame(k: int, rng: np.random.Generator) -> GapSequence:
    """Sample a k-frame: X_0 ~ U[1,2], then X_i ~ U[X_{i-1}/4, X_{i-1}/2]"""
    if k < 0:
        raise ValueError("Frame order k must be nonnegative")
    values = [rng.uniform(1.0, 2.0)]
    for _ in range(k):
        values.append(rng.uniform(values[-1] / 4, values[-1] / 2))
    return GapSequence(np.array(values))


def _count_chunk(k: int, rows: int, seed: Seed) -> int:
    tuples = exponential_draws(seed.rng(), rows * (k + 1)).reshape(rows, k + 1)
    return int(np.count_nonzero(frame_mask(tuples)))


def estimate_frame_probability(
    k: int, trials: int, seed=DEFAULT_SEED, threads: int = 1
) -> FrameEstimate:
    """
    Fraction of independent (k+1)-tuples of Exponential(1) draws that form a k-frame.

    Trials are split into fixed chunks, each with its own stream, so the
    estimate does not depend on the thread count.
    """
    if trials < 1:
        raise ValueError("need at least 1 trial")
    if k < 0:
        raise ValueError("Frame order k must be nonnegative")
    base = as_seed(seed).stream(purpose="frames", n=k)
    sizes = [min(CHUNK_ROWS, trials - offset) for offset in range(0, trials, CHUNK_ROWS)]
    jobs = [(size, base.stream(trial=index)) for index, size in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        successes = sum(pool.map(lambda job: _count_chunk(k, *job), jobs))
    logger.info("k=%d: %d frames in %d tuples", k, successes, trials)
    return FrameEstimate(k, trials, successes, frame_probability_bound(k), binomial_ci95(successes, trials))


def lower_bound_parameters(n: int, c: float) -> LowerBoundParameters:
    """
    Frame order k = floor(sqrt(c log2 n)) - 2 and the chance that no k-frame block occurs.

    Raises:
        ValueError: if n < 2, c <= 0 or k would be below 1
    """
    if n < 2:
        raise ValueError("need at least 2 points")
    if not c > 0:
        raise ValueError("Tail parameter c must be positive")
    root = math.sqrt(c * math.log2(n))
    k = math.floor(root) - 2
    if k < 1:
        raise ValueError("parameters below frame threshold")
    reach = n ** (1 - c)
    return LowerBoundParameters(
        n=n,
        c=c,
        k=k,
        failure_probability_bound=math.exp(-reach / root),
        proof_failure_bound=math.exp(-math.floor(reach / k)),
    )


def estimate_lower_bound(n: int, c: float, trials: int, seed=DEFAULT_SEED) -> LowerBoundEstimate:
    """
    Sample sequences of n+1 exponential gaps, count those holding a disjoint
    k-frame, and those whose n sensors reach Z_S >= k.

    The sensors are the first n prefix sums; the last gap only closes the
    sequence, as in the normalized construction of uniform points.
    """
    if trials < 1:
        raise ValueError("need at least 1 trial")
    parameters = lower_bound_parameters(n, c)
    base = as_seed(seed).stream(purpose="lower-bound", n=n)
    framed = 0
    z_values = []
    for trial in range(trials):
        g = exponential_gaps(n + 1, base.stream(trial=trial))
        if scan_frames(g, parameters.k, "disjoint").count:
            framed += 1
        z_values.append(max_interference(from_gaps(g.window(0, n))))
    reached = sum(z >= parameters.k for z in z_values)
    return LowerBoundEstimate(parameters, trials, framed / trials, reached / trials, tuple(z_values))
