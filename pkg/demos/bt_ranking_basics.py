"""Fit Bradley-Terry scores from a handful of pairwise outcomes.

The ranker never sees absolute quality, only who beat whom.  Two things make
it more informative than counting wins: ties contribute half a win to each
side, and victories over strong opponents count for more than victories over
weak ones.  The second half of this script shows the opponent-strength effect
on a deliberately rigged schedule.
"""

from btevolve import ComparisonRecord, LEFT_WINS, RIGHT_WINS, TIE, fit_bt, rank

# A small tournament: four candidates, six judgments, one tie.
records = [
    ComparisonRecord(0, 1, LEFT_WINS),
    ComparisonRecord(0, 2, LEFT_WINS),
    ComparisonRecord(0, 3, TIE),
    ComparisonRecord(1, 2, RIGHT_WINS),
    ComparisonRecord(2, 3, LEFT_WINS),
    ComparisonRecord(1, 3, RIGHT_WINS),
]

fit = fit_bt(records, 4)
print("scores:", [f"{s:+.3f}" for s in fit.scores])
print("ranking (best first):", rank(fit))
print(f"converged={fit.converged} after {fit.iterations} iterations")
print(f"zero-sum check: sum = {sum(fit.scores):+.2e}")
print()

# Opponent strength: candidates 0 and 1 are both undefeated at 2-0, but
# candidate 0 beat the two candidates that themselves beat candidate 1's
# victims.  Win counting calls this a dead heat; the fit does not.
rigged = [
    ComparisonRecord(0, 2, LEFT_WINS),
    ComparisonRecord(0, 3, LEFT_WINS),
    ComparisonRecord(1, 4, LEFT_WINS),
    ComparisonRecord(1, 5, LEFT_WINS),
    ComparisonRecord(2, 4, LEFT_WINS),
    ComparisonRecord(2, 5, LEFT_WINS),
    ComparisonRecord(3, 4, LEFT_WINS),
    ComparisonRecord(3, 5, LEFT_WINS),
]
fit = fit_bt(rigged, 6)
print("rigged schedule, both 0 and 1 are 2-0:")
for i, label in enumerate(["tough schedule", "soft schedule", "mid", "mid", "weak", "weak"]):
    print(f"  candidate {i} ({label:14s}) score {fit.scores[i]:+.3f}")
print("ranking:", rank(fit))
