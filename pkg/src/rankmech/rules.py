"""Valuation profiles and ranking allocation rules.

A ranking rule is a vector ``pi`` of rank probabilities. At a profile with
ties, the agents of a tie group share the probabilities of the ranks that
group occupies equally; everything downstream is expressed through the
profile's tie groups, so they are computed once at construction.

Agents are indexed from 0 in code; ranks are 1-based where a formula uses
them (``L_j``, ``pi_k``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exactnum import (
    ONE,
    ZERO,
    Rational,
    RationalLike,
    as_rational,
    binomial,
    render_rational,
)


class DimensionError(ValueError):
    """Rule and profile disagree on the number of agents."""


@dataclass(frozen=True, eq=True)
class ValuationProfile:
    """Reported values, one per agent, with the derived rank structure.

    Attributes
    ----------
    values : tuple of Rational
    groups : tuple of (value, members)
        Tie groups in strictly decreasing value order. ``members`` is a
        sorted tuple of agent indices.
    group_of : tuple of int
        0-based tie-group index of each agent.
    cumulative : tuple of int
        ``L_1, ..., L_m``: number of agents in the first ``j`` groups.
    """

    values: tuple
    groups: tuple = field(init=False, repr=False, compare=False)
    group_of: tuple = field(init=False, repr=False, compare=False)
    cumulative: tuple = field(init=False, repr=False, compare=False)

    def __init__(self, values: Iterable[RationalLike]):
        vals = tuple(as_rational(x) for x in values)
        if len(vals) < 2:
            raise ValueError("a profile needs at least two agents")
        if any(x < 0 for x in vals):
            raise ValueError("valuations must be nonnegative")
        object.__setattr__(self, "values", vals)
        order = sorted(range(len(vals)), key=lambda i: (-vals[i], i))
        groups = []
        for i in order:
            if groups and groups[-1][0] == vals[i]:
                groups[-1][1].append(i)
            else:
                groups.append((vals[i], [i]))
        groups = tuple((v, tuple(m)) for v, m in groups)
        group_of = [0] * len(vals)
        cumulative = []
        total = 0
        for j, (_, members) in enumerate(groups):
            for i in members:
                group_of[i] = j
            total += len(members)
            cumulative.append(total)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "group_of", tuple(group_of))
        object.__setattr__(self, "cumulative", tuple(cumulative))

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def group_value(self, k: int) -> Rational:
        """``v_(k)`` for 1-based group index ``k``; 0 past the last group."""
        if 1 <= k <= len(self.groups):
            return self.groups[k - 1][0]
        return ZERO

    @property
    def zero_agents(self) -> frozenset:
        return frozenset(i for i, x in enumerate(self.values) if x == 0)

    def is_zero_generic(self) -> bool:
        """Any two agents with equal values both have value zero."""
        return all(v == 0 or len(m) == 1 for v, m in self.groups)

    def is_distinct_positive(self) -> bool:
        return len(self.groups) == self.n and self.groups[-1][0] > 0

    def with_zeros(self, agents: Iterable[int]) -> "ValuationProfile":
        """The profile ``(0_T, v_{-T})``."""
        zeroed = set(agents)
        return ValuationProfile(ZERO if i in zeroed else x for i, x in enumerate(self.values))

    def with_value(self, agent: int, value: RationalLike) -> "ValuationProfile":
        vals = list(self.values)
        vals[agent] = as_rational(value)
        return ValuationProfile(vals)

    def to_json(self) -> dict:
        return {"values": [render_rational(x) for x in self.values]}

    @classmethod
    def from_json(cls, data: dict) -> "ValuationProfile":
        if not isinstance(data, dict) or "values" not in data:
            raise ValueError('profile JSON must be an object with a "values" list')
        return cls(as_rational(x) for x in data["values"])


def profile(*values: RationalLike) -> ValuationProfile:
    """Shorthand: ``profile(8, 4, 2, 1)``."""
    return ValuationProfile(values)


def rank_structure(v: ValuationProfile) -> list:
    """Tie groups as ``[(value, [agents...]), ...]`` in decreasing value order."""
    return [(value, list(members)) for value, members in v.groups]


@dataclass(frozen=True)
class RankingRule:
    """Rank probabilities ``pi_1 >= ... >= pi_n`` with total at most one."""

    pi: tuple
    prefix: tuple = field(init=False, repr=False, compare=False)

    def __init__(self, pi: Iterable[RationalLike]):
        vec = tuple(as_rational(x) for x in pi)
        if len(vec) < 2:
            raise ValueError("a ranking rule needs at least two ranks")
        if any(x < 0 or x > 1 for x in vec):
            raise ValueError("rank probabilities must lie in [0, 1]")
        if not is_monotone_ranking(vec):
            raise ValueError("rank probabilities must be nonincreasing")
        prefix = [ZERO]
        for x in vec:
            prefix.append(prefix[-1] + x)
        if prefix[-1] > 1:
            raise ValueError("rank probabilities must sum to at most one")
        object.__setattr__(self, "pi", vec)
        object.__setattr__(self, "prefix", tuple(prefix))

    @property
    def n(self) -> int:
        return len(self.pi)

    def __len__(self) -> int:
        return len(self.pi)

    def allocate(self, v: ValuationProfile) -> list:
        return allocate(self, v)

    def to_json(self) -> dict:
        return {"n": self.n, "pi": [render_rational(x) for x in self.pi]}

    @classmethod
    def from_json(cls, data: dict) -> "RankingRule":
        if not isinstance(data, dict) or "pi" not in data:
            raise ValueError('rule JSON must be an object with a "pi" list')
        rule = cls(as_rational(x) for x in data["pi"])
        if "n" in data and data["n"] != rule.n:
            raise ValueError(f'rule JSON says n={data["n"]} but pi has {rule.n} entries')
        return rule


def _check_dims(rule, v: ValuationProfile) -> None:
    if rule.n != v.n:
        raise DimensionError(f"rule has {rule.n} ranks but profile has {v.n} agents")


def group_shares(rule: RankingRule, v: ValuationProfile) -> list:
    """Per-agent probability within each tie group."""
    _check_dims(rule, v)
    out = []
    lo = 0
    for (_, members), hi in zip(v.groups, v.cumulative):
        out.append((rule.prefix[hi] - rule.prefix[lo]) / len(members))
        lo = hi
    return out


def allocate(rule: RankingRule, v: ValuationProfile) -> list:
    """Allocation probability of each agent at ``v``."""
    shares = group_shares(rule, v)
    return [shares[j] for j in v.group_of]


def implementability_residual(pi: Sequence[RationalLike]) -> Rational:
    """``sum_k (-1)^k C(n-1, k-1) pi_k``; zero exactly for implementable rules."""
    n = len(pi)
    total = ZERO
    for k in range(1, n + 1):
        total += (-1) ** k * binomial(n - 1, k - 1) * as_rational(pi[k - 1])
    return total


def is_implementable(rule: RankingRule) -> tuple:
    """``(implementable, residual)`` for a ranking rule."""
    residual = implementability_residual(rule.pi)
    return residual == 0, residual


def is_monotone_ranking(pi) -> bool:
    """True iff the probability vector is nonincreasing in rank."""
    vec = pi.pi if isinstance(pi, RankingRule) else [as_rational(x) for x in pi]
    return all(a >= b for a, b in zip(vec, vec[1:]))


def fosd_dominates(a: RankingRule, b: RankingRule) -> bool:
    """Every prefix sum of ``a`` weakly exceeds ``b``'s, strictly at least once."""
    if a.n != b.n:
        raise DimensionError("rules must have the same number of ranks")
    pairs = list(zip(a.prefix[1:], b.prefix[1:]))
    return all(x >= y for x, y in pairs) and any(x > y for x, y in pairs)


def gl_rule(n: int) -> RankingRule:
    """Green-Laffont rule ``(1 - 1/n, 1/n, 0, ..., 0)``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return RankingRule([ONE - ONE / n, ONE / n] + [ZERO] * (n - 2))


def equal_share_rule(n: int) -> RankingRule:
    if n < 2:
        raise ValueError("n must be at least 2")
    return RankingRule([ONE / n] * n)


def efficient_rule(n: int) -> RankingRule:
    """``(1, 0, ..., 0)``; never implementable, useful as a negative case."""
    return RankingRule([ONE] + [ZERO] * (n - 1))


@dataclass(frozen=True)
class TwoStepRule:
    """Top rank gets ``pi1``; ranks 2..ell share the rest equally."""

    pi1: Rational
    ell: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "pi1", as_rational(self.pi1))
        if self.n < 3:
            raise ValueError("two-step rules need n >= 3")
        if not 2 <= self.ell <= self.n - 1:
            raise ValueError(f"ell must lie in [2, {self.n - 1}], got {self.ell}")
        if not (self.pi2 > 0 and self.pi1 > self.pi2):
            raise ValueError(f"pi1={self.pi1} does not give pi1 > pi2 > 0 with ell={self.ell}")

    @property
    def pi2(self) -> Rational:
        return (ONE - self.pi1) / (self.ell - 1)

    def to_ranking_rule(self) -> RankingRule:
        return RankingRule([self.pi1] + [self.pi2] * (self.ell - 1) + [ZERO] * (self.n - self.ell))

    @classmethod
    def from_rule(cls, rule: RankingRule):
        """Recognize a two-step vector; ``None`` if ``rule`` is not one."""
        pi = rule.pi
        if rule.n < 3 or rule.prefix[-1] != 1:
            return None
        ell = sum(1 for x in pi if x > 0)
        if not 2 <= ell <= rule.n - 1:
            return None
        if any(x != pi[1] for x in pi[1:ell]) or not pi[0] > pi[1]:
            return None
        return cls(pi[0], ell, rule.n)


def two_step_rule(pi1: RationalLike, ell: int, n: int) -> RankingRule:
    """Expand ``(pi1, pi2 x (ell-1), 0 x (n-ell))``."""
    return TwoStepRule(as_rational(pi1), ell, n).to_ranking_rule()


def implementable_two_step_pi1(n: int, ell: int) -> Rational:
    """The only ``pi1`` making an even-``ell`` two-step rule implementable."""
    c = binomial(n - 2, ell - 1)
    return as_rational(c + 1) / (c + ell)
