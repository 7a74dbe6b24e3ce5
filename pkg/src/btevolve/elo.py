"""Effective-rating estimation from per-problem solve outcomes.

A model with rating R solves a problem of rating R_p with probability
1 / (1 + 10^((R_p - R) / 400)).  The rating estimate is the MAP under a
Gaussian prior, maximized over a bounded interval; uncertainty comes from a
seeded bootstrap over problems with percentile confidence bounds.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

DEFAULT_PRIOR_MEAN = 3100.0
DEFAULT_PRIOR_STD = 500.0
DEFAULT_BOUNDS = (1000.0, 5000.0)
DEFAULT_RESAMPLES = 1000


@dataclass(frozen=True)
class ProblemOutcome:
    """Evidence from one problem: successes out of trials at a known rating.

    Boolean evidence is the trials=1 special case; use `bernoulli`.
    """

    problem_rating: float
    successes: int
    trials: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.problem_rating):
            raise ValueError("problem_rating must be finite")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.successes <= self.trials:
            raise ValueError(f"successes {self.successes} out of range for {self.trials} trials")

    @classmethod
    def bernoulli(cls, problem_rating: float, solved: bool) -> "ProblemOutcome":
        return cls(problem_rating, 1 if solved else 0, 1)


@dataclass(frozen=True)
class EloEstimate:
    rating: float
    ci_low: float
    ci_high: float
    prior_mean: float
    prior_std: float
    bounds: tuple[float, float]
    resamples: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "rating": self.rating,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "prior_mean": self.prior_mean,
            "prior_std": self.prior_std,
            "bounds": list(self.bounds),
            "resamples": self.resamples,
            "seed": self.seed,
        }


def solve_probability(model_rating: float, problem_rating: float) -> float:
    """P(solve) for a model at `model_rating` on a problem at `problem_rating`."""
    return float(1.0 / (1.0 + np.power(10.0, (problem_rating - model_rating) / 400.0)))


def _outcome_arrays(outcomes) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if len(outcomes) == 0:
        raise ValueError("need at least one outcome")
    ratings = np.array([o.problem_rating for o in outcomes], dtype=np.float64)
    wins = np.array([o.successes for o in outcomes], dtype=np.float64)
    trials = np.array([o.trials for o in outcomes], dtype=np.float64)
    return ratings, wins, trials


def _neg_log_posterior(rating, ratings, wins, trials, prior_mean, prior_std):
    p = 1.0 / (1.0 + np.power(10.0, (ratings - rating) / 400.0))
    p = np.clip(p, 1e-300, 1.0 - 1e-16)  # keep the log finite at the bound ratings
    loglik = np.dot(wins, np.log(p)) + np.dot(trials - wins, np.log1p(-p))
    logprior = -0.5 * ((rating - prior_mean) / prior_std) ** 2
    return -(loglik + logprior)


def _map_arrays(ratings, wins, trials, prior_mean, prior_std, bounds) -> float:
    result = minimize_scalar(
        _neg_log_posterior,
        bounds=bounds,
        args=(ratings, wins, trials, prior_mean, prior_std),
        method="bounded",
        options={"xatol": 1e-6},
    )
    return float(result.x)


def map_estimate(
    outcomes,
    prior_mean: float = DEFAULT_PRIOR_MEAN,
    prior_std: float = DEFAULT_PRIOR_STD,
    bounds: tuple[float, float] = DEFAULT_BOUNDS,
) -> float:
    """Posterior-maximizing rating over the bounded interval, to 1e-6 Elo."""
    if prior_std <= 0:
        raise ValueError("prior_std must be positive")
    if not bounds[0] < bounds[1]:
        raise ValueError("bounds must be an increasing interval")
    ratings, wins, trials = _outcome_arrays(outcomes)
    return _map_arrays(ratings, wins, trials, prior_mean, prior_std, bounds)


def bootstrap_ci(
    outcomes,
    prior_mean: float = DEFAULT_PRIOR_MEAN,
    prior_std: float = DEFAULT_PRIOR_STD,
    bounds: tuple[float, float] = DEFAULT_BOUNDS,
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile bootstrap interval: resample problems with replacement,
    refit the MAP each time, take the 2.5th and 97.5th percentiles with
    linear interpolation.  Deterministic given the seed."""
    if resamples < 1:
        raise ValueError("resamples must be at least 1")
    ratings, wins, trials = _outcome_arrays(outcomes)
    rng = np.random.default_rng(seed)
    count = len(ratings)
    estimates = np.empty(resamples)
    for b in range(resamples):
        idx = rng.integers(0, count, size=count)
        estimates[b] = _map_arrays(ratings[idx], wins[idx], trials[idx], prior_mean, prior_std, bounds)
    low, high = np.percentile(estimates, [2.5, 97.5], method="linear")
    return float(low), float(high)


def estimate(
    outcomes,
    prior_mean: float = DEFAULT_PRIOR_MEAN,
    prior_std: float = DEFAULT_PRIOR_STD,
    bounds: tuple[float, float] = DEFAULT_BOUNDS,
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = 0,
) -> EloEstimate:
    rating = map_estimate(outcomes, prior_mean, prior_std, bounds)
    ci_low, ci_high = bootstrap_ci(outcomes, prior_mean, prior_std, bounds, resamples, seed)
    return EloEstimate(rating, ci_low, ci_high, prior_mean, prior_std, tuple(bounds), resamples, seed)


def load_outcomes(path: str | Path) -> list[ProblemOutcome]:
    """Read outcomes from CSV or JSON lines.

    CSV needs a header with `problem_rating` plus either `solved` (true/false)
    or `successes` and `trials`.  JSONL uses the same field names, one object
    per line.
    """
    path = Path(path)
    rows: list[dict]
    if path.suffix.lower() == ".csv":
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
    else:
        with open(path, encoding="utf-8") as handle:
            rows = [json.loads(line) for line in handle if line.strip()]
    outcomes = []
    for row in rows:
        rating = float(row["problem_rating"])
        if "solved" in row and row["solved"] not in (None, ""):
            solved = row["solved"] if isinstance(row["solved"], bool) else _parse_bool(row["solved"])
            outcomes.append(ProblemOutcome.bernoulli(rating, solved))
        else:
            outcomes.append(ProblemOutcome(rating, int(row["successes"]), int(row["trials"])))
    return outcomes


def _parse_bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")
