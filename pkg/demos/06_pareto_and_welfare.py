"""
Domination and worst-case welfare
=================================

A ranking rule is dominated if another implementable rule shifts probability
towards the top ranks everywhere. Its worst-case efficiency is its top
probability.
"""

from rankmech import equal_share_rule, gl_rule, r_optimal_rule
from rankmech.exactnum import render_rational
from rankmech.optimal import is_dominated_fosd, mu_sampler

dominated, witness = is_dominated_fosd(equal_share_rule(5))
print("equal share dominated:", dominated, "by", [render_rational(x) for x in witness.pi])
print("GL(5) dominated:", is_dominated_fosd(gl_rule(5))[0])

rule = r_optimal_rule(10).pi_star
res = mu_sampler(rule)
for s in res["structured"]:
    print(f"delta={render_rational(s.delta):>6}  welfare ratio={float(s.ratio):.6f}")
print("pi1 =", render_rational(res["pi1"]))
