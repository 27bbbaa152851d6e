import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from models.generators import DEFAULT_SEED, GENERATOR_KINDS, Seed, generate
from models.interference import interference_fast, left_interference

logger = logging.getLogger(__name__)

QUANTILES = {"p50": 0.50, "p95": 0.95, "p99": 0.99}

AGGREGATE_COLUMNS = [
    "n", "trials", "mean", "std", "min", "p50", "p95", "p99", "max",
    "mean_over_sqrt_ln_n", "mean_over_sqrt_log2_n",
]

RECORD_COLUMNS = ["n", "trial", "z_max", "argmax", "left_max"]


@dataclass
class ExperimentConfig:
    """Monte Carlo run over a grid of sensor counts"""
    n_grid: List[int]
    trials: int = 100
    seed: int = DEFAULT_SEED
    generator: str = "uniform"  # Any of GENERATOR_KINDS
    ratio: float = 0.5  # Shrink ratio, only used by the chain generator
    trials_by_n: Dict[int, int] = field(default_factory=dict)  # Per-n trial budget
    output_path: Optional[str] = None
    records_path: Optional[str] = None

    def __post_init__(self):
        self.n_grid = sorted(int(n) for n in self.n_grid)
        self.trials_by_n = {int(n): int(t) for n, t in self.trials_by_n.items()}
        if not self.n_grid:
            raise ValueError("n grid must not be empty")
        if self.n_grid[0] < 2:
            raise ValueError("need at least 2 points for every grid entry")
        if len(set(self.n_grid)) != len(self.n_grid):
            raise ValueError("n grid entries must be distinct")
        if self.trials < 1 or any(t < 1 for t in self.trials_by_n.values()):
            raise ValueError("need at least 1 trial per grid entry")
        if self.generator not in GENERATOR_KINDS:
            raise ValueError(
                f"Unknown generator kind {self.generator!r}; expected one of {', '.join(GENERATOR_KINDS)}"
            )
        if not 0 < self.ratio < 1:
            raise ValueError("Chain ratio must lie in (0, 1)")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("Master seed must be a 64-bit unsigned integer")

    def trials_for(self, n: int) -> int:
        return self.trials_by_n.get(n, self.trials)

    def to_dict(self) -> Dict:
        """Convert the config to a dictionary for metadata and replay"""
        data = asdict(self)
        data["trials_by_n"] = {str(n): t for n, t in sorted(self.trials_by_n.items())}
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "ExperimentConfig":
        """Create a config from a dictionary"""
        return cls(
            n_grid=list(data["n_grid"]),
            trials=data.get("trials", 100),
            seed=data.get("seed", DEFAULT_SEED),
            generator=data.get("generator", "uniform"),
            ratio=data.get("ratio", 0.5),
            trials_by_n={int(n): t for n, t in data.get("trials_by_n", {}).items()},
            output_path=data.get("output_path"),
            records_path=data.get("records_path"),
        )


@dataclass(frozen=True)
class AggregateRow:
    """Summary of Z_S over the trials at one grid point"""
    n: int
    trials: int
    mean: float
    std: float
    min: int
    p50: int
    p95: int
    p99: int
    max: int
    mean_over_sqrt_ln_n: float
    mean_over_sqrt_log2_n: float

    @classmethod
    def from_values(cls, n: int, values) -> "AggregateRow":
        ordered = np.sort(np.asarray(values, dtype=np.int64))
        mean = float(ordered.mean())
        quantiles = {name: nearest_rank(ordered, q) for name, q in QUANTILES.items()}
        return cls(
            n=n,
            trials=int(ordered.size),
            mean=mean,
            std=float(ordered.std()),
            min=int(ordered[0]),
            max=int(ordered[-1]),
            mean_over_sqrt_ln_n=mean / math.sqrt(math.log(n)),
            mean_over_sqrt_log2_n=mean / math.sqrt(math.log2(n)),
            **quantiles,
        )

    def validate(self):
        """Ordering and range checks every aggregate must satisfy"""
        if not self.min <= self.p50 <= self.p95 <= self.p99 <= self.max:
            raise ValueError(f"Quantiles out of order for n={self.n}")
        if self.min < 1 or self.max > self.n - 1:
            raise ValueError(f"Z_S outside [1, {self.n - 1}] for n={self.n}")

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit mean Z_S = a * sqrt(ln n) + b"""
    a: float
    b: float
    r2: float
    regressor: str = "sqrt_ln_n"

    def to_dict(self) -> Dict:
        return {"a": self.a, "b": self.b, "r2": self.r2, "regressor": self.regressor}


@dataclass(frozen=True)
class TailEstimate:
    """Fraction of trials with Z_S >= k"""
    n: int
    k: int
    trials: int
    hits: int
    ci95: Tuple[float, float]

    @property
    def fraction(self) -> float:
        return self.hits / self.trials

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "k": self.k,
            "trials": self.trials,
            "fraction": self.fraction,
            "ci95": list(self.ci95),
        }


def nearest_rank(ordered: np.ndarray, q: float) -> int:
    """Nearest-rank quantile of an ascending array"""
    rank = max(1, math.ceil(q * ordered.size))
    return int(ordered[rank - 1])


def binomial_ci95(successes: int, trials: int) -> Tuple[float, float]:
    """Wilson score 95% interval for a binomial proportion"""
    interval = stats.binomtest(int(successes), int(trials)).proportion_ci(
        confidence_level=0.95, method="wilson"
    )
    return float(interval.low), float(interval.high)


class MonteCarloSimulation:
    """Samples the maximum interference Z_S over a grid of sensor counts"""

    def __init__(self, config: ExperimentConfig, threads: int = 1):
        """
        Initialize the Monte Carlo simulation.

        Args:
            config: Validated experiment configuration
            threads: Worker threads; results do not depend on this value
        """
        self.config = config
        self.threads = max(1, int(threads))
        self.seed = Seed(config.seed)
        self.results = None

    def _run_trial(self, n: int, trial: int) -> Dict:
        """One seeded point set and its interference profile"""
        stream = self.seed.stream(purpose=self.config.generator, n=n, trial=trial)
        points = generate(self.config.generator, n, stream, ratio=self.config.ratio)
        profile = interference_fast(points)
        if not 1 <= profile.max <= n - 1:
            raise RuntimeError(f"Z_S={profile.max} outside [1, {n - 1}] at n={n}, trial {trial}")
        return {
            "n": n,
            "trial": trial,
            "z_max": profile.max,
            "argmax": profile.argmax,
            "left_max": left_interference(points).max,
        }

    def run_simulation(self) -> pd.DataFrame:
        """Run every trial of every grid point and store the per-trial records"""
        records = []
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            for n in self.config.n_grid:
                trials = self.config.trials_for(n)
                logger.info("n=%d: running %d trials (%s)", n, trials, self.config.generator)
                records.extend(pool.map(lambda t, n=n: self._run_trial(n, t), range(trials)))
        # pool.map keeps submission order, so the frame is already sorted by (n, trial)
        self.results = pd.DataFrame.from_records(records, columns=RECORD_COLUMNS)
        return self.results

    def get_summary_statistics(self) -> List[AggregateRow]:
        """Aggregate Z_S per grid point"""
        if self.results is None:
            raise ValueError("Simulation hasn't been run yet. Call run_simulation() first.")
        rows = []
        for n, group in self.results.groupby("n", sort=True):
            row = AggregateRow.from_values(int(n), group["z_max"].to_numpy())
            row.validate()
            rows.append(row)
        return rows

    def get_tail_fraction(self, n: int, k: int) -> TailEstimate:
        """Fraction of the stored trials at n with Z_S >= k"""
        if self.results is None:
            raise ValueError("Simulation hasn't been run yet. Call run_simulation() first.")
        values = self.results.loc[self.results["n"] == n, "z_max"].to_numpy()
        if values.size == 0:
            raise ValueError(f"n={n} is not part of the simulated grid")
        hits = int(np.count_nonzero(values >= k))
        return TailEstimate(n, k, int(values.size), hits, binomial_ci95(hits, values.size))


def run_trials(config: ExperimentConfig, threads: int = 1) -> Tuple[List[AggregateRow], pd.DataFrame]:
    """
    Run the configured experiment.

    Returns:
        Aggregate rows in grid order and the per-trial records
    """
    simulation = MonteCarloSimulation(config, threads)
    records = simulation.run_simulation()
    return simulation.get_summary_statistics(), records


def fit_scaling(rows: List[AggregateRow]) -> ScalingFit:
    """
    Ordinary least squares of mean Z_S against sqrt(ln n).

    Raises:
        ValueError: with fewer than 3 distinct n
    """
    if len({row.n for row in rows}) < 3:
        raise ValueError("need at least 3 distinct n to fit a scaling law")
    x = np.sqrt(np.log([float(row.n) for row in rows]))
    y = np.array([row.mean for row in rows], dtype=np.float64)
    fit = stats.linregress(x, y)
    residual = y - (fit.slope * x + fit.intercept)
    total = float(np.sum((y - y.mean()) ** 2))
    r2 = 0.0 if total == 0.0 else 1.0 - float(np.sum(residual ** 2)) / total
    return ScalingFit(a=float(fit.slope), b=float(fit.intercept), r2=min(1.0, max(0.0, r2)))


def tail_estimate(
    n: int, k: int, trials: int, seed=DEFAULT_SEED, generator: str = "uniform", threads: int = 1
) -> TailEstimate:
    """Fraction of seeded trials at n whose Z_S reaches k, with a Wilson 95% interval"""
    if k < 0:
        raise ValueError("Threshold k must be nonnegative")
    master = seed.master if isinstance(seed, Seed) else int(seed)
    config = ExperimentConfig(n_grid=[n], trials=trials, seed=master, generator=generator)
    simulation = MonteCarloSimulation(config, threads)
    simulation.run_simulation()
    return simulation.get_tail_fraction(n, k)


@dataclass(frozen=True)
class ContrastResult:
    """Worst-case chain against uniform placement at the same n"""
    n: int
    trials: int
    chain_mean: float
    chain_std: float
    uniform_mean: float

    @property
    def normalized_uniform(self) -> float:
        """Uniform mean in units of 2 sqrt(log2 n)"""
        return self.uniform_mean / (2 * math.sqrt(math.log2(self.n)))

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["normalized_uniform"] = self.normalized_uniform
        return data


def run_contrast(n: int, trials: int, seed=DEFAULT_SEED, threads: int = 1) -> ContrastResult:
    """Run the chain and uniform generators on the same n and trial budget"""
    master = seed.master if isinstance(seed, Seed) else int(seed)
    chain, _ = run_trials(ExperimentConfig(n_grid=[n], trials=trials, seed=master, generator="chain"), threads)
    uniform, _ = run_trials(ExperimentConfig(n_grid=[n], trials=trials, seed=master, generator="uniform"), threads)
    logger.info("n=%d: chain mean %.1f, uniform mean %.3f", n, chain[0].mean, uniform[0].mean)
    return ContrastResult(n, trials, chain[0].mean, chain[0].std, uniform[0].mean)
