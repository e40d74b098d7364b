"""The unique budget-balanced, symmetric, DSIC payment rule.

Three independent routes compute the same payments:

* :func:`payments_subset_formula` - signed sums of elementary revenues
  ``R(0_T, v_-T)`` over supersets ``T`` of the zero-valued agents;
* :func:`payments_two_step` - closed form for two-step rules on profiles with
  distinct positive values;
* :func:`payments_recursive` - zero out agents one at a time, applying
  revenue equivalence and splitting the deficit equally among zero-valued
  agents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from operator import itemgetter

from .exactnum import ZERO, Rational, as_rational, binomial, psi, render_rational
from .revenue import revenue_view, total_revenue, total_revenue_sorted
from .rules import (
    RankingRule,
    TwoStepRule,
    ValuationProfile,
    _check_dims,
    allocate,
    implementable_two_step_pi1,
    is_implementable,
)

MAX_SUBSET_AGENTS = 20


class NotImplementableError(ValueError):
    """No balanced symmetric DSIC payment exists for this allocation rule."""


@dataclass(frozen=True)
class Outcome:
    allocation: tuple
    payments: tuple
    utilities: tuple

    def to_json(self) -> dict:
        return {
            "allocation": [render_rational(x) for x in self.allocation],
            "payments": [render_rational(x) for x in self.payments],
            "utilities": [render_rational(x) for x in self.utilities],
        }


def _require_implementable(rule) -> None:
    if isinstance(rule, RankingRule):
        ok, residual = is_implementable(rule)
        if not ok:
            raise NotImplementableError(
                f"ranking rule is not satisfactorily implementable (residual {residual})"
            )


@lru_cache(maxsize=None)
def _mask_tables(m: int) -> tuple:
    """For ``m`` free agents: per mask, (popcount, kept indices); per agent, masks containing it."""
    per_mask = []
    containing = [[] for _ in range(m)]
    for mask in range(1 << m):
        kept = tuple(b for b in range(m) if not mask >> b & 1)
        per_mask.append((m - len(kept), kept))
        for b in range(m):
            if mask >> b & 1:
                containing[b].append(mask)
    return tuple(per_mask), tuple(tuple(c) for c in containing)


def _gather(seq, idx: tuple) -> tuple:
    if not idx:
        return ()
    if len(idx) == 1:
        return (seq[idx[0]],)
    return itemgetter(*idx)(seq)


def payments_subset_formula(rule, v: ValuationProfile, *, check: bool = True) -> list:
    """Payments via signed subset sums of elementary revenues.

    ``R(0_T, v_-T)`` is evaluated once per superset ``T`` of the zero-valued
    agents (ranking rules additionally share evaluations between subsets
    leaving the same multiset of values). ``check=False`` skips the
    implementability precondition; verification uses it to exhibit the
    budget imbalance of non-implementable rules.
    """
    _check_dims(rule, v)
    n = v.n
    if n > MAX_SUBSET_AGENTS:
        raise ValueError(f"subset enumeration is limited to n <= {MAX_SUBSET_AGENTS}, got n={n}")
    if check:
        _require_implementable(rule)
    ranking = isinstance(rule, RankingRule)

    zeros = sorted(v.zero_agents)
    k = len(zeros)
    # ascending order keeps every kept-subset tuple sorted, i.e. a multiset key
    free = sorted((i for i in range(n) if v.values[i] != 0), key=lambda i: v.values[i])
    m = len(free)
    free_values = tuple(v.values[i] for i in free)
    per_mask, containing = _mask_tables(m)

    # signed weights indexed by |S|, where T = zeros + S
    w_zero = [as_rational((-1) ** s) / binomial(k + s, k) for s in range(m + 1)]
    w_free = [ZERO] + [as_rational((-1) ** (s - 1)) / binomial(k + s, k + 1) for s in range(1, m + 1)]

    memo = {}
    acc_zero = ZERO
    terms = []
    for mask, (s, kept) in enumerate(per_mask):
        remaining = _gather(free_values, kept)
        key = remaining if ranking else mask
        r = memo.get(key)
        if r is None:
            if ranking:
                r = total_revenue_sorted(rule, (ZERO,) * (n - len(remaining)) + remaining)
            else:
                r = total_revenue(rule, v.with_zeros(free[b] for b in range(m) if mask >> b & 1))
            memo[key] = r
        if k:
            acc_zero += w_zero[s] * r
        terms.append(w_free[s] * r)

    elementary = revenue_view(rule, v).per_agent
    p = [ZERO] * n
    if k:
        pz = -acc_zero / k
        for i in zeros:
            p[i] = pz
    for b, i in enumerate(free):
        p[i] = elementary[i] - sum(_gather(terms, containing[b]), ZERO) / (k + 1)
    return p


def payments_recursive(rule, v: ValuationProfile, *, check: bool = True) -> list:
    """Payments by zeroing agents one at a time.

    At a profile ``w`` whose zero-valued agents are ``K``: a positive agent
    pays ``p_i(0, w_-i) + R_i(w)`` (revenue equivalence), and each agent in
    ``K`` pays the same share ``-(1/|K|) sum_{i not in K} p_i(w)``. Since
    ``p_i(0, w_-i)`` is itself a zero-agent share one level down, the
    recursion only tracks that share per zero set; the all-zero profile
    pays nothing.
    """
    _check_dims(rule, v)
    if check:
        _require_implementable(rule)
    ranking = isinstance(rule, RankingRule)
    n = v.n
    # work in ascending-value order so kept values come out as sorted multiset keys
    order = sorted(range(n), key=lambda i: v.values[i])
    u = tuple(v.values[i] for i in order)
    per_mask, _ = _mask_tables(n)
    full = (1 << n) - 1
    start = 0
    for pos, i in enumerate(order):
        if u[pos] == 0:
            start |= 1 << pos

    revenue_cache = {}

    def revenue_at(mask: int):
        zeroed, kept = per_mask[mask]
        if ranking:
            key = (ZERO,) * zeroed + _gather(u, kept)
        else:
            key = mask
        r = revenue_cache.get(key)
        if r is None:
            if ranking:
                r = total_revenue_sorted(rule, key)
            else:
                r = total_revenue(rule, v.with_zeros(order[b] for b in range(n) if mask >> b & 1))
            revenue_cache[key] = r
        return r

    # zero_share[mask]: common payment of the zero-valued agents when the
    # agents in ``mask`` report zero. Supersets are filled first.
    # sum_{i not in K} p_i(w) = R(w) + sum_{i not in K} share(K + i),
    # zero-valued agents having R_i = 0
    share = {full: ZERO}
    for mask in range(full - 1, -1, -1):
        if mask & start != start or mask == 0:
            continue
        total = revenue_at(mask)
        for b in range(n):
            if not mask >> b & 1:
                total += share[mask | 1 << b]
        share[mask] = -total / per_mask[mask][0]

    elementary = revenue_view(rule, v).per_agent
    p = [ZERO] * n
    for pos, i in enumerate(order):
        if start >> pos & 1:
            p[i] = share[start]
        else:
            p[i] = share[start | 1 << pos] + elementary[i]
    return p


def payments_two_step(two_step, v: ValuationProfile) -> list:
    """Closed-form payments for an implementable two-step rule.

    Defined only for profiles with distinct positive values. Formulas are
    stated by rank; results are mapped back to agent indices.
    """
    if isinstance(two_step, RankingRule):
        recognized = TwoStepRule.from_rule(two_step)
        if recognized is None:
            raise ValueError("rule is not a two-step ranking rule")
        two_step = recognized
    if two_step.n != v.n:
        raise ValueError(f"rule has {two_step.n} ranks but profile has {v.n} agents")
    n, ell = two_step.n, two_step.ell
    if ell % 2 or two_step.pi1 != implementable_two_step_pi1(n, ell):
        raise NotImplementableError(f"two-step rule (pi1={two_step.pi1}, ell={ell}) is not implementable")
    if not v.is_distinct_positive():
        raise ValueError("two-step closed form needs distinct positive values; use the subset formula")

    by_rank = [members[0] for _, members in v.groups]
    val = [None] + [v.values[a] for a in by_rank]  # val[k] = k-th highest value

    def coef(k: int) -> int:
        return (-1) ** k * math.factorial(k - 1) * psi(n - ell, n - k - 1)

    scale = -two_step.pi2 / math.factorial(ell - 1)
    p = [ZERO] * n
    for rank in range(1, n + 1):
        if rank == 1:
            s = sum((coef(k) * val[k + 1] for k in range(1, ell)), ZERO)
        elif rank <= ell:
            s = sum((coef(k) * val[k] for k in range(2, rank)), ZERO)
            s += sum((coef(k) * val[k + 1] for k in range(rank, ell)), ZERO)
        else:
            s = sum((coef(k) * val[k] for k in range(2, ell)), ZERO)
            s += (-1) ** ell * math.factorial(ell - 1) * val[ell]
        p[by_rank[rank - 1]] = scale * s
    return p


def run_mechanism(rule: RankingRule, v: ValuationProfile) -> Outcome:
    """Allocation, payments and net utilities of the satisfactory mechanism."""
    _require_implementable(rule)
    alloc = allocate(rule, v)
    two_step = TwoStepRule.from_rule(rule) if isinstance(rule, RankingRule) else None
    if two_step is not None and v.is_distinct_positive():
        pay = payments_two_step(two_step, v)
    else:
        pay = payments_subset_formula(rule, v)
    util = [x * f - p for x, f, p in zip(v.values, alloc, pay)]
    return Outcome(tuple(alloc), tuple(pay), tuple(util))


def utilities(rule, v: ValuationProfile, payments: list) -> list:
    alloc = rule.allocate(v)
    return [x * f - p for x, f, p in zip(v.values, alloc, payments)]
