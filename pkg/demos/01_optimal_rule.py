"""
Building the r-optimal ranking rule
===================================

For each number of agents there is a best budget-balanced ranking rule: it
maximizes the probability that the highest-valued agent wins.
"""

from rankmech import r_optimal_rule, select_ell
from rankmech.exactnum import render_rational, to_decimal_string

# Small markets: the optimum puts 1 - 1/n on the top rank and 1/n on the runner-up.
for n in range(3, 8):
    rep = r_optimal_rule(n)
    print(n, [render_rational(p) for p in rep.pi_star.pi])

# At eight agents two step lengths tie; both give a top probability of 7/8.
ell, argmin = select_ell(8)
print("n=8 minimizers:", argmin)
print("ell=4 variant:", [render_rational(p) for p in r_optimal_rule(8, prefer_ell=4).pi_star.pi])

# From nine agents on, the remaining mass is spread over several ranks.
rep = r_optimal_rule(11)
print("n=11 uses ell =", rep.ell, "with pi1 =", render_rational(rep.pi1_star), "~", to_decimal_string(rep.pi1_star, 4))
