"""
Certifying optimality with the dual
===================================

The r-optimal rule solves a small linear program. An explicit dual solution
closes the duality gap, which proves optimality without trusting the solver.
"""

from rankmech.exactnum import render_rational
from rankmech.lp import optimal_vertices, solve_lp
from rankmech.optimal import build_lp_rank, check_dual_certificate, dual_certificate, r_optimal_rule

for n in (5, 9, 11, 14):
    primal = solve_lp(build_lp_rank(n)).value
    cert = dual_certificate(n)
    res = check_dual_certificate(cert)
    print(n, "primal", render_rational(primal), "dual", render_rational(cert.z),
          "feasible", res["constraints_satisfied"] and res["theta_nonnegative"], "closed", res["gap_closed"])
    assert primal == r_optimal_rule(n).pi1_star == cert.z

# At n=8 the optimal face is an edge with two vertices.
value, vertices = optimal_vertices(build_lp_rank(8))
for vx in vertices:
    print("n=8 vertex:", [render_rational(x) for x in vx])
