import logging
from collections import Counter
from typing import Dict

import numpy as np

from models import __version__
from models.frames import estimate_frame_probability
from models.monte_carlo import ExperimentConfig, MonteCarloSimulation, fit_scaling, run_contrast, run_trials

logger = logging.getLogger(__name__)


def _scaling_records(settings: Dict, threads: int) -> Dict:
    config = ExperimentConfig.from_dict(settings["config"])
    rows, _ = run_trials(config, threads)
    fit = fit_scaling(rows)
    means = np.array([row.mean for row in rows])
    normalized = np.array([row.mean_over_sqrt_ln_n for row in rows])
    return {
        "n": [row.n for row in rows],
        "trials": [row.trials for row in rows],
        "mean": means.tolist(),
        "mean_over_sqrt_ln_n": normalized.tolist(),
        "relative_spread_sqrt_ln": float((normalized.max() - normalized.min()) / normalized.max()),
        "fit": fit.to_dict(),
    }


def _tail_records(settings: Dict, threads: int) -> Dict:
    config = settings["config"]
    n = config["n"]
    simulation = MonteCarloSimulation(
        ExperimentConfig(n_grid=[n], trials=config["trials"], seed=config["seed"], generator=config["generator"]),
        threads,
    )
    records = simulation.run_simulation()
    tail = simulation.get_tail_fraction(n, settings["k"])
    histogram = Counter(int(z) for z in records["z_max"])
    return {
        "n": n,
        "k": settings["k"],
        "fraction": tail.fraction,
        "ci95": list(tail.ci95),
        "z_max_histogram": {str(z): histogram[z] for z in sorted(histogram)},
    }


def _frame_records(settings: Dict, threads: int) -> Dict:
    estimates = [
        estimate_frame_probability(k, settings["trials"], settings["seed"], threads)
        for k in settings.get("orders", [0, 1])
    ]
    return {str(estimate.k): estimate.to_dict() for estimate in estimates}


def run_pilot(fixtures: Dict, threads: int = 1) -> Dict:
    """
    Run the pilot configurations stored with the tolerance bands and collect
    the observed statistics the bands were set from.

    Sections missing from the fixtures are skipped.
    """
    observed = {"version": __version__, "fixtures_version": fixtures.get("version")}
    if "scaling" in fixtures:
        logger.info("pilot: scaling grid")
        observed["scaling"] = _scaling_records(fixtures["scaling"], threads)
    if "tail" in fixtures:
        logger.info("pilot: tail at n=%d", fixtures["tail"]["config"]["n"])
        observed["tail"] = _tail_records(fixtures["tail"], threads)
    if "contrast" in fixtures:
        config = fixtures["contrast"]["config"]
        logger.info("pilot: contrast at n=%d", config["n"])
        observed["contrast"] = run_contrast(config["n"], config["trials"], config["seed"], threads).to_dict()
    if "frames" in fixtures:
        logger.info("pilot: frame frequencies")
        observed["frames"] = _frame_records(fixtures["frames"], threads)
    return observed
