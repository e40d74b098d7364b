"""
Drawing the winner
==================

The mechanism outputs exact probabilities. For a demonstration the winner
can be drawn from a seeded Philox stream; the frequencies match the
allocation.
"""

from collections import Counter

from rankmech import gl_rule, profile, run_mechanism
from rankmech.harness import sample_lotteries, sample_lottery

outcome = run_mechanism(gl_rule(4), profile(8, 4, 2, 1))
print("one draw with seed 3:", sample_lottery(outcome, 3))
counts = Counter(sample_lotteries(outcome, seed=3, draws=100_000))
print({agent: c / 100_000 for agent, c in sorted(counts.items())})
