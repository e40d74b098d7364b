"""The r-optimal ranking rule and the machinery that certifies it.

Among satisfactorily implementable ranking rules, the one maximizing the
top-rank probability ``pi_1`` (equivalently the worst-case efficiency) is a
two-step rule whose step length ``ell`` minimizes
``(i - 1) / (C(n-2, i-1) + i)`` over even ``i``. This module builds that
rule, re-derives its optimality by exact simplex on the ranking LP, and
exhibits a dual-feasible point with the same objective, which closes the
duality gap.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .exactnum import ONE, ZERO, Rational, as_rational, binomial, render_rational, to_decimal_string
from .lp import LinearProgram, optimal_vertices, solve_lp
from .rules import (
    RankingRule,
    TwoStepRule,
    ValuationProfile,
    allocate,
    implementable_two_step_pi1,
    is_implementable,
)

MU_DELTAS = (ONE / 10, ONE / 100, ONE / 1000)


def _ell_objective(n: int, i: int) -> Rational:
    return as_rational(i - 1) / (binomial(n - 2, i - 1) + i)


def select_ell(n: int) -> tuple:
    """``(ell, argmin_set)`` by exhaustive exact minimization over even ``i``.

    The smallest minimizer is returned as ``ell``; at ``n = 8`` the set is
    ``(2, 4)``.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    scores = {i: _ell_objective(n, i) for i in range(2, n, 2)}
    best = min(scores.values())
    argmin = tuple(i for i in sorted(scores) if scores[i] == best)
    return argmin[0], argmin


def closed_form_ell(n: int, inclusive: bool = False) -> int:
    """Closed-form step length for ``n >= 9``.

    By default this is the largest even integer strictly below
    ``(n + 1) / 2``, which agrees with :func:`select_ell` for every ``n``
    tested. ``inclusive=True`` gives the largest even integer ``<= (n + 1) / 2``
    instead; the two differ exactly when ``(n + 1) / 2`` is an even integer
    (``n = 11, 15, 19, ...``), and there the inclusive value is not a
    minimizer: at ``n = 11`` it yields ``5/132`` against ``3/88`` for
    ``ell = 4``. :func:`select_ell` stays the source of truth.
    """
    if n < 9:
        raise ValueError("the closed form for ell only applies for n >= 9")
    half, odd = divmod(n + 1, 2)
    e = half if (inclusive or odd) else half - 1
    return e - (e % 2)


@dataclass(frozen=True)
class OptimalRuleReport:
    n: int
    ell: int
    ell_argmin_set: tuple
    pi_star: RankingRule
    pi1_star: Rational
    unique: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "ell": self.ell,
            "ell_argmin_set": list(self.ell_argmin_set),
            "unique": self.unique,
            "pi": [render_rational(x) for x in self.pi_star.pi],
            "pi1": render_rational(self.pi1_star),
            "pi1_decimal": to_decimal_string(self.pi1_star, 6),
        }


def r_optimal_rule(n: int, prefer_ell: Optional[int] = None) -> OptimalRuleReport:
    """The r-optimal two-step rule for ``n`` agents.

    ``prefer_ell`` picks among tied minimizers (only ``n = 8`` has a tie);
    it must belong to the argmin set.
    """
    default, argmin = select_ell(n)
    ell = default
    if prefer_ell is not None:
        if prefer_ell not in argmin:
            raise ValueError(f"ell={prefer_ell} is not optimal for n={n}; optimal set is {list(argmin)}")
        ell = prefer_ell
    pi1 = implementable_two_step_pi1(n, ell)
    rule = TwoStepRule(pi1, ell, n).to_ranking_rule()
    return OptimalRuleReport(n, ell, argmin, rule, pi1, len(argmin) == 1)


def worst_case_efficiency(rule: RankingRule) -> Rational:
    """``mu = pi_1``: the infimum of the welfare ratio over all profiles."""
    return rule.pi[0]


def welfare_ratio(rule: RankingRule, v: ValuationProfile) -> Rational:
    """Expected welfare over the largest value, with ``0/0 = 1``."""
    top = max(v.values)
    if top == 0:
        return ONE
    alloc = allocate(rule, v)
    return sum((x * f for x, f in zip(v.values, alloc)), ZERO) / top


@dataclass(frozen=True)
class MuSample:
    delta: Rational
    profile: ValuationProfile
    ratio: Rational


def mu_structured_samples(rule: RankingRule, deltas: Sequence = MU_DELTAS) -> list:
    """Welfare ratios on ``(1, delta, ..., delta)``, where the infimum is approached."""
    n = rule.n
    out = []
    for d in deltas:
        d = as_rational(d)
        v = ValuationProfile([ONE] + [d] * (n - 1))
        out.append(MuSample(d, v, welfare_ratio(rule, v)))
    return out


def mu_sampler(rule: RankingRule, profiles: Sequence = (), deltas: Sequence = MU_DELTAS) -> dict:
    """Minimum welfare ratio over the structured family plus any extra profiles."""
    structured = mu_structured_samples(rule, deltas)
    extra = [welfare_ratio(rule, v) for v in profiles]
    ratios = [s.ratio for s in structured] + extra
    return {
        "pi1": rule.pi[0],
        "structured": structured,
        "structured_min": min(s.ratio for s in structured),
        "overall_min": min(ratios),
        "sampled": len(ratios),
    }


# ---------------------------------------------------------------------------
# The ranking LP and its dual


def _prop1_row(n: int) -> list:
    return [as_rational((-1) ** k * binomial(n - 1, k - 1)) for k in range(1, n + 1)]


def _ranking_constraints(n: int) -> dict:
    mono = []
    for i in range(n - 1):
        row = [ZERO] * n
        row[i + 1] = ONE
        row[i] = -ONE
        mono.append(row)
    return {
        "ub_rows": mono,
        "ub_rhs": [ZERO] * (n - 1),
        "eq_rows": [_prop1_row(n), [ONE] * n],
        "eq_rhs": [ZERO, ONE],
    }


def build_lp_rank(n: int, eps: Optional[Sequence] = None) -> LinearProgram:
    """Maximize ``pi_1 + eps . pi`` over implementable ranking rules that never waste the good."""
    if n < 2:
        raise ValueError("n must be at least 2")
    eps = [ZERO] * n if eps is None else [as_rational(e) for e in eps]
    if len(eps) != n:
        raise ValueError(f"epsilon must have length {n}")
    c = list(eps)
    c[0] += ONE
    cons = _ranking_constraints(n)
    return LinearProgram(c, names=tuple(f"pi{k}" for k in range(1, n + 1)), **cons)


def lp_rank_optimum(n: int) -> tuple:
    """``(value, optimal vertices)`` of the unperturbed ranking LP."""
    return optimal_vertices(build_lp_rank(n))


@dataclass(frozen=True)
class DualCertificate:
    n: int
    y: Rational
    z: Rational
    theta: tuple

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "y": render_rational(self.y),
            "z": render_rational(self.z),
            "theta": [render_rational(t) for t in self.theta],
        }


def dual_constraint_slacks(n: int, y, z, theta: Sequence, eps: Optional[Sequence] = None) -> list:
    """Left minus right side of each dual constraint (one per primal variable).

    Dual feasibility means every slack and every ``theta_i`` is nonnegative.
    """
    eps = [ZERO] * n if eps is None else [as_rational(e) for e in eps]
    theta = [as_rational(t) for t in theta]
    y, z = as_rational(y), as_rational(z)
    if len(theta) != n - 1:
        raise ValueError(f"theta must have length {n - 1}")
    out = []
    for j in range(1, n + 1):
        lhs = (-1) ** j * binomial(n - 1, j - 1) * y + z
        if j <= n - 1:
            lhs -= theta[j - 1]
        if j >= 2:
            lhs += theta[j - 2]
        rhs = eps[j - 1] + (ONE if j == 1 else ZERO)
        out.append(lhs - rhs)
    return out


def dual_certificate(n: int, ell: Optional[int] = None) -> DualCertificate:
    """Explicit dual solution of the ranking LP at zero perturbation.

    ``z`` is the optimal top probability, ``y = z - 1``, and
    ``theta_i = (H_i - 1) - z (H_i - i)`` with ``H_i = (-1)^(i-1) C(n-2, i-1)``.
    ``ell`` selects which minimizer seeds ``z`` when there is a tie; all
    minimizers give the same value.
    """
    report = r_optimal_rule(n, ell)
    z = report.pi1_star
    theta = []
    for i in range(1, n):
        h = (-1) ** (i - 1) * binomial(n - 2, i - 1)
        theta.append((h - 1) - z * (h - i))
    return DualCertificate(n, z - ONE, z, tuple(theta))


def check_dual_certificate(cert: DualCertificate) -> dict:
    """Exact dual feasibility of ``cert`` and the primal/dual objective match."""
    slacks = dual_constraint_slacks(cert.n, cert.y, cert.z, cert.theta)
    primal = r_optimal_rule(cert.n)
    primal_lp = build_lp_rank(cert.n)
    primal_ok = primal_lp.is_feasible_point(primal.pi_star.pi)
    return {
        "theta_nonnegative": all(t >= 0 for t in cert.theta),
        "constraints_satisfied": all(s >= 0 for s in slacks),
        "slacks": slacks,
        "primal_feasible": primal_ok,
        "primal_value": primal_lp.value_at(primal.pi_star.pi),
        "dual_value": cert.z,
        "gap_closed": primal_ok and primal_lp.value_at(primal.pi_star.pi) == cert.z,
    }


def build_dp_rank(n: int, eps: Optional[Sequence] = None) -> LinearProgram:
    """The dual LP, as ``maximize -z`` over ``(theta_1..theta_{n-1}, y, z)``."""
    eps = [ZERO] * n if eps is None else [as_rational(e) for e in eps]
    nv = n + 1  # theta (n-1), y, z
    ub_rows, ub_rhs = [], []
    for j in range(1, n + 1):
        # the dual constraint, negated into <= form
        row = [ZERO] * nv
        if j <= n - 1:
            row[j - 1] -= ONE
        if j >= 2:
            row[j - 2] += ONE
        row[n - 1] = as_rational((-1) ** j * binomial(n - 1, j - 1))
        row[n] = ONE
        ub_rows.append([-a for a in row])
        ub_rhs.append(-(eps[j - 1] + (ONE if j == 1 else ZERO)))
    objective = [ZERO] * (n - 1) + [ZERO, -ONE]
    bounds = [(ZERO, None)] * (n - 1) + [(None, None), (None, None)]
    names = tuple(f"theta{i}" for i in range(1, n)) + ("y", "z")
    return LinearProgram(objective, ub_rows=ub_rows, ub_rhs=ub_rhs, bounds=bounds, names=names)


# ---------------------------------------------------------------------------
# r-Pareto optimality


def is_dominated_fosd(rule: RankingRule) -> tuple:
    """``(dominated, witness)`` via one exact LP.

    Maximizes the sum of prefix sums over implementable, non-wasteful
    ranking rules whose prefix sums all weakly exceed ``rule``'s. The rule
    is dominated exactly when that optimum beats its own value; the optimal
    vertex is then a dominating rule.
    """
    ok, residual = is_implementable(rule)
    if not ok:
        raise ValueError(f"rule is not implementable (residual {residual})")
    if rule.prefix[-1] != 1:
        raise ValueError("domination is only checked for rules that always allocate the good")
    n = rule.n
    weights = [as_rational(n - i) for i in range(n)]  # sum of prefixes = sum (n-i+1) pi_i
    cons = _ranking_constraints(n)
    for j in range(1, n):
        # prefix_j(pi') >= prefix_j(rule)  <=>  -prefix_j(pi') <= -prefix_j(rule)
        cons["ub_rows"].append([-ONE] * j + [ZERO] * (n - j))
        cons["ub_rhs"].append(-rule.prefix[j])
    lp = LinearProgram(weights, **cons)
    sol = solve_lp(lp)
    own = lp.value_at(rule.pi)
    if sol.value > own:
        return True, RankingRule(sol.x)
    return False, None


def r_pareto_bounds_check(rule: RankingRule) -> bool:
    """``1 - 1/n <= pi_1 <= pi_1*``, necessary for any undominated rule."""
    n = rule.n
    return ONE - ONE / n <= rule.pi[0] <= r_optimal_rule(n).pi1_star


def top_two_family(n: int) -> RankingRule:
    """Implementable non-wasteful rules supported on the top two ranks.

    The conditions ``pi_1 + pi_2 = 1`` and the implementability equation
    restricted to two ranks, ``-pi_1 + (n-1) pi_2 = 0``, form a 2x2 system;
    solving it by Cramer's rule gives the only member of the family.
    """
    a = [[ONE, ONE], [-ONE, as_rational(n - 1)]]
    b = [ONE, ZERO]
    det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    if det == 0:
        raise ArithmeticError("singular system")
    pi1 = (b[0] * a[1][1] - a[0][1] * b[1]) / det
    pi2 = (a[0][0] * b[1] - b[0] * a[1][0]) / det
    return RankingRule([pi1, pi2] + [ZERO] * (n - 2))


__all__ = [
    "MU_DELTAS",
    "DualCertificate",
    "MuSample",
    "OptimalRuleReport",
    "build_dp_rank",
    "build_lp_rank",
    "check_dual_certificate",
    "closed_form_ell",
    "dual_certificate",
    "dual_constraint_slacks",
    "is_dominated_fosd",
    "lp_rank_optimum",
    "mu_sampler",
    "mu_structured_samples",
    "r_optimal_rule",
    "r_pareto_bounds_check",
    "select_ell",
    "top_two_family",
    "welfare_ratio",
    "worst_case_efficiency",
]
