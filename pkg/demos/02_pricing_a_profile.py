"""
Pricing one profile three ways
==============================

Payments follow from the allocation rule alone. The subset formula, the
zero-out recursion and the two-step closed form must agree to the last bit.
"""

from rankmech import TwoStepRule, gl_rule, payments_recursive, payments_subset_formula, payments_two_step, profile, run_mechanism
from rankmech.exactnum import render_rational

rule = gl_rule(4)
v = profile(8, 4, 2, 1)

subset = payments_subset_formula(rule, v)
recursive = payments_recursive(rule, v)
closed = payments_two_step(TwoStepRule.from_rule(rule), v)
print("subset   ", [render_rational(p) for p in subset])
print("recursive", [render_rational(p) for p in recursive])
print("two-step ", [render_rational(p) for p in closed])
assert subset == recursive == closed

# The full outcome: the top agent pays, the two losers are paid, the budget balances.
outcome = run_mechanism(rule, v)
print(outcome.to_json())
print("sum of payments:", sum(outcome.payments))

# Ties share the probability of the ranks they occupy, and share the payment too.
tied = run_mechanism(rule, profile(5, 5, 1, 1))
print(tied.to_json())
