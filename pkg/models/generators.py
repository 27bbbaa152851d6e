import logging
import zlib
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from models.highway import GapSequence, PointSet, from_gaps

logger = logging.getLogger(__name__)

# Fixed default so that every randomized command is replayable without flags
DEFAULT_SEED = 20240601

GENERATOR_KINDS = ("uniform", "expgaps", "normalized", "chain", "equal")

_MAX_REDRAWS = 64


@dataclass(frozen=True)
class Seed:
    """
    Master seed plus stream labels.

    The labels (purpose, n, trial) become the spawn key of a numpy SeedSequence
    feeding a counter-based Philox generator, so every stream is reproducible
    and independent of the order in which streams are consumed.
    """
    master: int = DEFAULT_SEED
    purpose: str = "default"
    n: int = 0
    trial: int = 0

    def __post_init__(self):
        if not 0 <= self.master < 2 ** 64:
            raise ValueError("Master seed must be a 64-bit unsigned integer")
        if self.n < 0 or self.trial < 0:
            raise ValueError("Stream labels must be nonnegative")

    def stream(
        self, purpose: Optional[str] = None, n: Optional[int] = None, trial: Optional[int] = None
    ) -> "Seed":
        """Derive a seed for another stream of the same master"""
        changes = {}
        if purpose is not None:
            changes["purpose"] = purpose
        if n is not None:
            changes["n"] = n
        if trial is not None:
            changes["trial"] = trial
        return replace(self, **changes)

    def rng(self) -> np.random.Generator:
        tag = zlib.crc32(self.purpose.encode("utf-8"))
        sequence = np.random.SeedSequence(self.master, spawn_key=(tag, self.n, self.trial))
        return np.random.Generator(np.random.Philox(sequence))


def as_seed(seed) -> Seed:
    if isinstance(seed, Seed):
        return seed
    return Seed(int(seed))


def _draw_until_valid(draw: Callable[[np.random.Generator], np.ndarray], seed: Seed, what: str):
    rng = seed.rng()
    for attempt in range(_MAX_REDRAWS):
        try:
            return draw(rng)
        except ValueError:
            logger.debug("Redrawing %s for %s (attempt %d)", what, seed, attempt + 1)
    raise RuntimeError(f"Could not draw valid {what} after {_MAX_REDRAWS} attempts")


def uniform_points(n: int, seed=DEFAULT_SEED) -> PointSet:
    """
    n i.i.d. Uniform(0,1) sensors in sorted order.

    Draws containing 0 or a repeated value are discarded and redrawn from the
    same stream.
    """
    if n < 0:
        raise ValueError("Point count cannot be negative")

    def draw(rng):
        values = np.sort(rng.random(n))
        if n and values[0] <= 0.0:
            raise ValueError("zero coordinate")
        return PointSet(values)

    return _draw_until_valid(draw, as_seed(seed), "uniform points")


def exponential_draws(rng: np.random.Generator, m: int) -> np.ndarray:
    # inverse CDF on u in [0, 1); u = 0 gives a zero gap and is redrawn
    return -np.log1p(-rng.random(m))


def exponential_gaps(m: int, seed=DEFAULT_SEED) -> GapSequence:
    """m i.i.d. Exponential(1) gaps anchored at 0"""
    if m < 0:
        raise ValueError("Gap count cannot be negative")
    return _draw_until_valid(
        lambda rng: GapSequence(exponential_draws(rng, m)), as_seed(seed), "exponential gaps"
    )


def exponential_points(n: int, seed=DEFAULT_SEED) -> PointSet:
    """Unnormalized exponential model: x_i = X_0 + ... + X_{i-1}"""
    return from_gaps(exponential_gaps(n, seed))


def uniform_via_exponentials(n: int, seed=DEFAULT_SEED) -> PointSet:
    """
    Uniform order statistics built from n+1 exponential spacings.

    The prefix sums x'_1..x'_n are divided by the total x'_{n+1}; the result is
    distributed as n sorted Uniform(0,1) values.
    """
    if n < 1:
        raise ValueError("need at least 1 point")

    def draw(rng):
        totals = np.cumsum(exponential_draws(rng, n + 1))
        if totals[0] <= 0.0:
            raise ValueError("zero gap")
        return PointSet(totals[:n] / totals[n])

    return _draw_until_valid(draw, as_seed(seed), "normalized exponential points")


def exponential_chain(n: int, ratio: float = 0.5) -> PointSet:
    """
    Exponential node chain x_i = ratio^(n-i), gaps shrinking toward the left end.

    When the smallest coordinate would leave the normal double range the chain
    is built from exact rationals instead.
    """
    if n < 2:
        raise ValueError("need at least 2 points")
    if not 0 < ratio < 1:
        raise ValueError(f"Chain ratio must lie in (0, 1), got {ratio}")
    exponents = np.arange(n - 1, -1, -1)
    if ratio ** (n - 1) >= np.finfo(np.float64).tiny:
        positions = np.power(float(ratio), exponents.astype(np.float64))
        if np.all(np.diff(positions) > 0):
            return PointSet(positions)
    logger.debug("Chain of %d sensors at ratio %s uses exact coordinates", n, ratio)
    exact_ratio = Fraction(ratio)
    return PointSet(np.array([exact_ratio ** int(e) for e in exponents], dtype=object))


def equally_spaced(n: int) -> PointSet:
    """x_i = i/(n+1)"""
    if n < 1:
        raise ValueError("need at least 1 point")
    return PointSet(np.arange(1, n + 1) / (n + 1))


def generate(kind: str, n: int, seed=DEFAULT_SEED, ratio: float = 0.5) -> PointSet:
    """
    Build a point set of the named kind.

    Args:
        kind: One of GENERATOR_KINDS
        n: Number of sensors
        seed: Seed (or bare master seed) for the randomized kinds
        ratio: Shrink ratio for the exponential chain

    Returns:
        PointSet of n sensors
    """
    if kind == "uniform":
        return uniform_points(n, seed)
    if kind == "expgaps":
        return exponential_points(n, seed)
    if kind == "normalized":
        return uniform_via_exponentials(n, seed)
    if kind == "chain":
        return exponential_chain(n, ratio)
    if kind == "equal":
        return equally_spaced(n)
    raise ValueError(f"Unknown generator kind {kind!r}; expected one of {', '.join(GENERATOR_KINDS)}")
