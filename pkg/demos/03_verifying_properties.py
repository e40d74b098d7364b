"""
Sweeping a grid for DSIC, budget balance and symmetry
=====================================================

Every property is checked exactly on every profile of a small value grid.
A rule that cannot be priced shows up with a concrete witness.
"""

from rankmech import efficient_rule, r_optimal_rule
from rankmech.verify import DEFAULT_GRID, check_expost_ir, check_satisfactory

report = check_satisfactory(r_optimal_rule(4).pi_star, DEFAULT_GRID)
for c in report.checks:
    print(f"{c.name:30s} {'ok' if c.passed else 'FAILED'}  ({c.checked} checks)")

# Efficient allocation cannot be paired with balanced DSIC payments.
bad = check_satisfactory(efficient_rule(3), DEFAULT_GRID, dsic=False)
res = bad.check("residual_balance")
print("efficient rule, residual balance:", res.passed, "witness", res.to_json()["counterexample"], "residual", res.to_json()["residual"])

# Losing agents never pay under the r-optimal rule.
ir = check_expost_ir(r_optimal_rule(5).pi_star, DEFAULT_GRID)
print("ex-post IR:", ir.passed, ir.notes)
