"""Payments of the elementary mechanism.

For a monotone allocation rule ``f`` the elementary mechanism charges
``R_i(v) = v_i f_i(v) - int_0^{v_i} f_i(x, v_-i) dx`` and collects
``R(v) = sum_i R_i(v)`` in total.

For ranking rules ``f_i(., v_-i)`` is a step function whose breakpoints are
the opponents' values, so the integral is a finite exact sum. Non-ranking
rules can be priced too if they expose ``allocate(v)`` and
``allocation_integral(v, agent)`` (see :class:`rankmech.verify.StepAllocationRule`).
"""
from __future__ import annotations

from dataclasses import dataclass

from .exactnum import ZERO, Rational, render_rational
from .rules import DimensionError, RankingRule, ValuationProfile, _check_dims


@dataclass(frozen=True)
class RevenueView:
    per_agent: tuple
    total: Rational

    def to_json(self) -> dict:
        return {
            "per_agent": [render_rational(x) for x in self.per_agent],
            "total": render_rational(self.total),
        }


def _group_integrals(rule: RankingRule, v: ValuationProfile) -> list:
    # integral for a member of group j: sum_{h >= j} pi_{L_h} (v_(h) - v_(h+1))
    groups = v.groups
    m = len(groups)
    out = [ZERO] * m
    acc = ZERO
    for h in range(m - 1, -1, -1):
        nxt = groups[h + 1][0] if h + 1 < m else ZERO
        acc += rule.pi[v.cumulative[h] - 1] * (groups[h][0] - nxt)
        out[h] = acc
    return out


def _group_revenues(rule: RankingRule, v: ValuationProfile) -> list:
    """Per-member elementary payment for each tie group."""
    integrals = _group_integrals(rule, v)
    out = []
    lo = 0
    for (value, members), hi, integral in zip(v.groups, v.cumulative, integrals):
        share = (rule.prefix[hi] - rule.prefix[lo]) / len(members)
        out.append(value * share - integral)
        lo = hi
    return out


def allocation_integral(rule, v: ValuationProfile, agent: int) -> Rational:
    """``int_0^{v_i} f_i(x, v_-i) dx`` for agent ``agent``."""
    _check_dims(rule, v)
    if not isinstance(rule, RankingRule):
        return rule.allocation_integral(v, agent)
    return _group_integrals(rule, v)[v.group_of[agent]]


def elementary_payment(rule, v: ValuationProfile, agent: int) -> Rational:
    _check_dims(rule, v)
    if not isinstance(rule, RankingRule):
        return v.values[agent] * rule.allocate(v)[agent] - rule.allocation_integral(v, agent)
    return _group_revenues(rule, v)[v.group_of[agent]]


def revenue_view(rule, v: ValuationProfile) -> RevenueView:
    _check_dims(rule, v)
    if isinstance(rule, RankingRule):
        by_group = _group_revenues(rule, v)
        per_agent = tuple(by_group[j] for j in v.group_of)
    else:
        alloc = rule.allocate(v)
        per_agent = tuple(
            v.values[i] * alloc[i] - rule.allocation_integral(v, i) for i in range(v.n)
        )
    return RevenueView(per_agent, sum(per_agent, ZERO))


def total_revenue(rule, v: ValuationProfile) -> Rational:
    """``R(v)``, without materializing per-agent values."""
    _check_dims(rule, v)
    if not isinstance(rule, RankingRule):
        return revenue_view(rule, v).total
    total = ZERO
    for (_, members), r in zip(v.groups, _group_revenues(rule, v)):
        total += len(members) * r
    return total


def total_revenue_sorted(rule: RankingRule, ascending: tuple) -> Rational:
    """``R(v)`` for a ranking rule from the values sorted in ascending order.

    Ranking rules are symmetric, so the total depends only on the multiset of
    values; this skips building a profile and walks the tie groups from the
    bottom, accumulating the allocation integral on the way up.
    """
    pi, prefix = rule.pi, rule.prefix
    n = len(ascending)
    if n != rule.n:
        raise DimensionError(f"rule has {rule.n} ranks but profile has {n} agents")
    total = ZERO
    integral = ZERO
    below = ZERO
    i = 0
    while i < n:
        x = ascending[i]
        j = i + 1
        while j < n and ascending[j] == x:
            j += 1
        # this group holds ranks n-j+1 .. n-i
        integral += pi[n - i - 1] * (x - below)
        total += x * (prefix[n - i] - prefix[n - j]) - (j - i) * integral
        below = x
        i = j
    return total


def revenue_closed_form_0generic(rule: RankingRule, v: ValuationProfile) -> Rational:
    """``sum_{j=1}^{n-1} j v_(j+1) (pi_j - pi_{j+1})`` on 0-generic profiles."""
    _check_dims(rule, v)
    if not v.is_zero_generic():
        raise ValueError("closed form requires a 0-generic profile (ties only at zero)")
    pi = rule.pi
    total = ZERO
    for j in range(1, v.n):
        total += j * v.group_value(j + 1) * (pi[j - 1] - pi[j])
    return total
