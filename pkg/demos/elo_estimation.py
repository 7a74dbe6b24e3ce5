"""Estimate a solver rating from pass/fail results on rated problems.

Each problem carries a known difficulty rating; solving it is a Bernoulli
trial whose success odds follow the standard 400-point logistic curve.  The
estimator maximizes the posterior under a wide Gaussian prior and wraps the
point estimate in a problem-resampling bootstrap interval.
"""

import numpy as np

from btevolve import ProblemOutcome, estimate, map_estimate, solve_probability

print("win probability vs opponent rating (model at 3100):")
for problem in (2600, 2900, 3100, 3300, 3600):
    print(f"  {problem}: {solve_probability(3100, problem):.3f}")
print()

# One solve and one failure on the same problem: evidence is perfectly
# balanced, so the estimate sits exactly at that problem's rating.
symmetric = [ProblemOutcome.bernoulli(3100, True), ProblemOutcome.bernoulli(3100, False)]
print(f"symmetric fixture: MAP = {map_estimate(symmetric):.3f}")
print()

# A realistic slate: 60 problems spread around the true strength of 3250.
rng = np.random.default_rng(11)
TRUE_RATING = 3250.0
outcomes = []
for _ in range(60):
    rating = float(rng.uniform(2700, 3800))
    solved = bool(rng.random() < solve_probability(TRUE_RATING, rating))
    outcomes.append(ProblemOutcome.bernoulli(rating, solved))

result = estimate(outcomes, resamples=1000, seed=0)
print(f"true rating {TRUE_RATING:.0f}, solved {sum(o.successes for o in outcomes)}/60")
print(f"MAP estimate {result.rating:.1f}, 95% CI [{result.ci_low:.1f}, {result.ci_high:.1f}]")
print("JSON form:", result.to_dict())
