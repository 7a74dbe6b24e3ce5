"""Bradley-Terry score fitting from pairwise comparison outcomes.

Scores are latent strengths on the log-odds scale: the modeled probability
that candidate i beats candidate j is sigmoid(s_i - s_j).  A tie contributes
half a win to each side.  The fit maximizes the sum of per-comparison log
likelihoods minus an L2 penalty (lam/2)*||s||^2; the penalty pins the shift
gauge that the likelihood alone leaves free, which forces the optimum to be
zero-sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

LEFT_WINS = "left-wins"
RIGHT_WINS = "right-wins"
TIE = "tie"
OUTCOMES = (LEFT_WINS, RIGHT_WINS, TIE)


@dataclass(frozen=True)
class ComparisonRecord:
    """One pairwise outcome between candidates addressed by index."""

    left: int
    right: int
    outcome: str

    def __post_init__(self) -> None:
        if self.left == self.right:
            raise ValueError(f"self-comparison of index {self.left}")
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")


@dataclass(frozen=True)
class ScoreVector:
    """Fitted strengths plus the fit diagnostics callers need to trust them."""

    scores: np.ndarray
    lam: float
    converged: bool
    iterations: int

    def __len__(self) -> int:
        return len(self.scores)


def _win_entries(
    records: list[ComparisonRecord] | tuple[ComparisonRecord, ...],
    population_size: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flatten records into (winner, loser, weight) arrays; ties become two half-wins."""
    winners: list[int] = []
    losers: list[int] = []
    weights: list[float] = []
    for rec in records:
        if not (0 <= rec.left < population_size and 0 <= rec.right < population_size):
            raise ValueError(
                f"record ({rec.left}, {rec.right}) out of range for population of {population_size}"
            )
        if rec.outcome == LEFT_WINS:
            winners.append(rec.left)
            losers.append(rec.right)
            weights.append(1.0)
        elif rec.outcome == RIGHT_WINS:
            winners.append(rec.right)
            losers.append(rec.left)
            weights.append(1.0)
        else:
            winners.extend((rec.left, rec.right))
            losers.extend((rec.right, rec.left))
            weights.extend((0.5, 0.5))
    return (
        np.asarray(winners, dtype=np.intp),
        np.asarray(losers, dtype=np.intp),
        np.asarray(weights, dtype=np.float64),
    )


def _objective_arrays(s, winners, losers, weights, lam):
    d = s[winners] - s[losers]
    # log(sigmoid(d)) = -log(1 + exp(-d)), computed stably for both signs
    loglik = -np.logaddexp(0.0, -d)
    return float(np.dot(weights, loglik) - 0.5 * lam * np.dot(s, s))


def _gradient_arrays(s, winners, losers, weights, lam, n):
    d = s[winners] - s[losers]
    e = weights * (1.0 - 1.0 / (1.0 + np.exp(-d)))
    g = np.bincount(winners, weights=e, minlength=n) - np.bincount(losers, weights=e, minlength=n)
    return g - lam * s


def _hessian_arrays(s, winners, losers, weights, lam, n):
    # -(L + lam*I) with L the graph Laplacian under edge weights w*p*(1-p);
    # negative definite for lam > 0, so Newton steps are always well posed
    d = s[winners] - s[losers]
    p = 1.0 / (1.0 + np.exp(-d))
    w = weights * p * (1.0 - p)
    hess = np.zeros((n, n))
    np.add.at(hess, (winners, losers), w)
    np.add.at(hess, (losers, winners), w)
    diag = np.bincount(winners, weights=w, minlength=n) + np.bincount(losers, weights=w, minlength=n)
    hess[np.diag_indices(n)] = -diag - lam
    return hess


def bt_objective(scores, records, lam: float = 0.01) -> float:
    """Penalized log-likelihood of `scores` for the given comparison records."""
    s = np.asarray(scores, dtype=np.float64)
    if lam <= 0:
        raise ValueError("lam must be positive")
    winners, losers, weights = _win_entries(records, len(s))
    return _objective_arrays(s, winners, losers, weights, lam)


def bt_gradient(scores, records, lam: float = 0.01) -> np.ndarray:
    """Gradient of bt_objective with respect to every score component.

    Component i receives +w*(1 - sigmoid(s_i - s_j)) for each (possibly
    half-weighted) win of i over j, -w*sigmoid(s_i - s_j) for each loss,
    minus lam*s_i from the penalty.
    """
    s = np.asarray(scores, dtype=np.float64)
    if lam <= 0:
        raise ValueError("lam must be positive")
    winners, losers, weights = _win_entries(records, len(s))
    return _gradient_arrays(s, winners, losers, weights, lam, len(s))


def fit_bt(
    records,
    population_size: int,
    lam: float = 0.01,
    tolerance: float = 1e-8,
    max_iterations: int = 500,
) -> ScoreVector:
    """Maximize the penalized likelihood and return fitted scores.

    Deterministic: zero initialization, L-BFGS-B with the analytic gradient,
    a damped Newton polish, then exact mean centering (the likelihood is
    shift-invariant and the penalty strictly prefers the centered point, so
    centering is an exact ascent step that also makes the zero-sum property
    hold exactly).  The polish exists because near-flat directions (weakly
    penalized undefeated candidates) stall a function-value line search in
    rounding noise well before the gradient reaches `tolerance`; Newton
    steps on the analytic gradient do not have that floor.  `converged`
    reports whether the gradient max-norm at the returned point is within
    `tolerance`; a non-converged fit is still returned.
    """
    if population_size < 2:
        raise ValueError("population_size must be at least 2")
    if lam <= 0:
        raise ValueError("lam must be positive")
    winners, losers, weights = _win_entries(records, population_size)
    if winners.size == 0:
        return ScoreVector(np.zeros(population_size), lam, True, 0)

    n = population_size

    def neg_objective(s):
        return -_objective_arrays(s, winners, losers, weights, lam)

    def neg_gradient(s):
        return -_gradient_arrays(s, winners, losers, weights, lam, n)

    result = minimize(
        neg_objective,
        np.zeros(n),
        jac=neg_gradient,
        method="L-BFGS-B",
        options={
            "maxiter": max_iterations,
            "maxfun": 50 * max_iterations,
            # stop on the gradient criterion, not on f-stagnation
            "ftol": 1e-17,
            "gtol": 0.1 * tolerance,
        },
    )
    s = result.x
    iterations = int(result.nit)
    for _ in range(50):
        grad = _gradient_arrays(s, winners, losers, weights, lam, n)
        if np.max(np.abs(grad)) <= 0.5 * tolerance:
            break
        step = np.linalg.solve(_hessian_arrays(s, winners, losers, weights, lam, n), grad)
        scale = 1.0
        reference = np.max(np.abs(grad))
        while scale > 1e-4:
            trial = s - scale * step
            trial_grad = _gradient_arrays(trial, winners, losers, weights, lam, n)
            if np.max(np.abs(trial_grad)) < reference:
                break
            scale *= 0.5
        else:
            break  # no damping helps; keep the best point we have
        s = trial
        iterations += 1
    s = s - s.mean()
    grad = _gradient_arrays(s, winners, losers, weights, lam, n)
    converged = bool(np.max(np.abs(grad)) <= tolerance)
    return ScoreVector(s, lam, converged, iterations)


def rank(score_vector: ScoreVector) -> list[int]:
    """Indices from best to worst; exact score ties break toward the lower index."""
    s = score_vector.scores
    return sorted(range(len(s)), key=lambda i: (-s[i], i))
