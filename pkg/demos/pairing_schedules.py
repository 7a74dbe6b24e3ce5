"""Draw K-regular comparison schedules and check how fair they are.

Each round of the pipeline gives every candidate exactly k opponents, drawn
uniformly over simple k-regular graphs (no self-pairs, no repeats).  Averaged
over many rounds, every pair of candidates should meet about equally often,
and n*k has to be even or no such graph exists.
"""

from collections import Counter

from btevolve import sample_pairing

plan = sample_pairing(n=12, k=3, seed=0)
print(f"one 3-regular round for 12 candidates ({len(plan.pairs)} pairs):")
print(" ", plan.pairs)
degrees = Counter()
for a, b in plan.pairs:
    degrees[a] += 1
    degrees[b] += 1
print("  degrees:", dict(sorted(degrees.items())))
print()

# Fairness across rounds: with k=4 of n=20, each specific pair should appear
# in a fraction k/(n-1) = 4/19 of rounds.
counts = Counter()
rounds = 2000
for seed in range(rounds):
    counts.update(sample_pairing(20, 4, seed).pairs)
expected = rounds * 4 / 19
lo, hi = min(counts.values()), max(counts.values())
print(f"pair appearances over {rounds} rounds: min {lo}, max {hi}, expected {expected:.0f}")
print(f"all {len(counts)} possible pairs seen, spread within "
      f"[{lo / expected:.2f}x, {hi / expected:.2f}x] of expected")
print()

try:
    sample_pairing(5, 3, seed=0)
except ValueError as exc:
    print(f"5 candidates with k=3 is rejected: {exc}")
