"""Exact verification of the satisfactory properties over profile sweeps.

The checks accept a :class:`~rankmech.rules.RankingRule` or any symmetric
rule wrapped in :class:`StepAllocationRule`. Each property failure carries a
concrete profile and the exact violated quantity. Profiles are processed in
lexicographic order, so reports are reproducible.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .exactnum import ONE, ZERO, Rational, as_rational, parse_rational, render_rational
from .harness import random_profiles
from .payments import MAX_SUBSET_AGENTS, payments_subset_formula
from .revenue import revenue_view, total_revenue, total_revenue_sorted
from .rules import RankingRule, TwoStepRule, ValuationProfile, _check_dims, is_implementable, is_monotone_ranking


class StepAllocationRule:
    """A symmetric allocation rule given as a callback.

    ``allocate_fn`` maps a tuple of exact values to one probability per
    agent. The rule is assumed piecewise constant in each agent's own value,
    with breakpoints only at the opponents' values and at the fixed
    ``thresholds``; under that assumption the allocation integral is an
    exact finite sum, evaluating the allocation at the midpoint of each
    piece.
    """

    def __init__(self, n: int, allocate_fn: Callable, thresholds: Iterable = (), name: str = "callback"):
        if n < 2:
            raise ValueError("n must be at least 2")
        self.n = n
        self._fn = allocate_fn
        self.thresholds = tuple(sorted({as_rational(t) for t in thresholds}))
        self.name = name

    def allocate(self, v: ValuationProfile) -> list:
        out = [as_rational(x) for x in self._fn(v.values)]
        if len(out) != self.n:
            raise ValueError(f"allocation callback returned {len(out)} entries for {self.n} agents")
        return out

    def allocation_integral(self, v: ValuationProfile, agent: int) -> Rational:
        own = v.values[agent]
        cuts = {ZERO, own}
        cuts.update(x for j, x in enumerate(v.values) if j != agent and x < own)
        cuts.update(t for t in self.thresholds if 0 < t < own)
        cuts = sorted(cuts)
        total = ZERO
        for lo, hi in zip(cuts, cuts[1:]):
            mid = (lo + hi) / 2
            total += (hi - lo) * self.allocate(v.with_value(agent, mid))[agent]
        return total

    def __repr__(self) -> str:
        return f"StepAllocationRule(n={self.n}, name={self.name!r})"


def check_residual_balance(rule, v: ValuationProfile) -> Rational:
    """``sum_{T subset N} (-1)^|T| R(0_T, v_-T)`` at a zero-free profile."""
    _check_dims(rule, v)
    if v.zero_agents:
        raise ValueError("residual balance is defined only for profiles without zero values")
    if v.n > MAX_SUBSET_AGENTS:
        raise ValueError(f"subset enumeration is limited to n <= {MAX_SUBSET_AGENTS}, got n={v.n}")
    ranking = isinstance(rule, RankingRule)
    memo = {}
    total = ZERO
    for mask in range(1 << v.n):
        w = tuple(ZERO if mask >> i & 1 else x for i, x in enumerate(v.values))
        key = tuple(sorted(w)) if ranking else w
        r = memo.get(key)
        if r is None:
            r = total_revenue_sorted(rule, key) if ranking else total_revenue(rule, ValuationProfile(key))
            memo[key] = r
        if bin(mask).count("1") % 2:
            total -= r
        else:
            total += r
    return total


# ---------------------------------------------------------------------------
# Profile sets

_SPEC_TOKEN = re.compile(r"^(values|random|denom|seed)=(.+)$")


@dataclass(frozen=True)
class GridSpec:
    """Reproducible profile set: exhaustive over ``values`` or ``count`` random draws."""

    kind: str
    values: tuple = ()
    count: int = 0
    denom: int = 64
    seed: int = 0

    def profiles(self, n: int) -> list:
        if self.kind == "exhaustive":
            profs = [ValuationProfile(t) for t in itertools.product(self.values, repeat=n)]
        else:
            profs = random_profiles(n, self.count, self.seed, self.denom)
        return sorted(profs, key=lambda p: p.values)

    def describe(self) -> str:
        if self.kind == "exhaustive":
            return "values=" + ",".join(render_rational(x) for x in self.values) + ";exhaustive"
        return f"random={self.count};denom={self.denom};seed={self.seed}"


def parse_grid_spec(text: str, seed: int = 0) -> GridSpec:
    """Parse ``values=0,1/3,2/3,1;exhaustive`` or ``random=500;denom=64[;seed=S]``."""
    parts = [p.strip() for p in text.split(";") if p.strip()]
    fields = {}
    exhaustive = False
    for part in parts:
        if part == "exhaustive":
            exhaustive = True
            continue
        m = _SPEC_TOKEN.match(part)
        if not m or m.group(1) in fields:
            raise ValueError(f"bad grid spec component {part!r}")
        fields[m.group(1)] = m.group(2)
    if "values" in fields:
        if not exhaustive or set(fields) - {"values"}:
            raise ValueError("a values grid is written 'values=a,b,...;exhaustive'")
        values = tuple(parse_rational(x.strip()) for x in fields["values"].split(","))
        if not values or any(x < 0 for x in values):
            raise ValueError("grid values must be nonnegative rationals")
        return GridSpec("exhaustive", values=tuple(sorted(set(values))))
    if "random" in fields and not exhaustive:
        count, denom = int(fields["random"]), int(fields.get("denom", 64))
        if count < 1 or denom < 1:
            raise ValueError("random count and denominator bound must be positive")
        return GridSpec("random", count=count, denom=denom, seed=int(fields.get("seed", seed)))
    raise ValueError(f"unrecognized grid spec {text!r}")


DEFAULT_GRID = GridSpec("exhaustive", values=(ZERO, ONE / 3, 2 * ONE / 3, ONE))


# ---------------------------------------------------------------------------
# Reports


@dataclass
class CheckResult:
    name: str
    passed: bool = True
    checked: int = 0
    counterexample: Optional[ValuationProfile] = None
    residual: Optional[Rational] = None
    detail: str = ""

    def fail(self, profile: ValuationProfile, residual, detail: str) -> None:
        """Record a violation; the first one found is kept as the witness."""
        if self.passed:
            self.passed = False
            self.counterexample = profile
            self.residual = as_rational(residual)
            self.detail = detail

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "counterexample": None if self.counterexample is None else self.counterexample.to_json()["values"],
            "residual": None if self.residual is None else render_rational(self.residual),
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    grid_spec: str
    checks: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "grid_spec": self.grid_spec,
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
            "notes": self.notes,
        }


class _Payments:
    """Per-sweep cache of subset-formula payments, keyed by the value tuple."""

    def __init__(self, rule, check: bool):
        self.rule = rule
        self.check = check
        self.cache = {}

    def __call__(self, v: ValuationProfile) -> list:
        got = self.cache.get(v.values)
        if got is None:
            got = self.cache[v.values] = payments_subset_formula(self.rule, v, check=self.check)
        return got


def _profiles(grid, n: int) -> tuple:
    if isinstance(grid, str):
        grid = parse_grid_spec(grid)
    if isinstance(grid, GridSpec):
        return grid.profiles(n), grid.describe(), grid.values
    profs = sorted(grid, key=lambda p: p.values)
    return profs, f"explicit list of {len(profs)} profiles", ()


def _deviations(v: ValuationProfile, agent: int, grid_values: tuple) -> list:
    """Grid points plus every piece of the own-value step function."""
    cuts = sorted({ZERO} | {x for j, x in enumerate(v.values) if j != agent})
    out = set(grid_values) | set(cuts)
    out.update((a + b) / 2 for a, b in zip(cuts, cuts[1:]))
    out.add(cuts[-1] + 1)
    out.discard(v.values[agent])
    return sorted(out)


def _sample(profiles: list, k: Optional[int]) -> list:
    if k is None or k >= len(profiles):
        return profiles
    step = len(profiles) / k
    return [profiles[int(i * step)] for i in range(k)]


def check_satisfactory(rule, grid=DEFAULT_GRID, *, dsic: bool = True, dsic_sample: Optional[int] = None) -> VerificationReport:
    """Sweep every satisfactory property of ``rule`` over ``grid``.

    ``grid`` is a :class:`GridSpec`, its text form, or an explicit list of
    profiles. Payments come from the subset formula even when the rule is
    not implementable, so the budget-balance check shows where they fail.
    ``dsic_sample`` limits the deviation sweep to that many evenly spaced
    base profiles (all other checks always use every profile).
    """
    n = rule.n
    profiles, described, grid_values = _profiles(grid, n)
    report = VerificationReport(described)
    pay = _Payments(rule, check=False)
    ranking = isinstance(rule, RankingRule)

    mono = CheckResult("monotonicity")
    if ranking:
        mono.checked = 1
        if not is_monotone_ranking(rule):  # pragma: no cover - RankingRule enforces it
            mono.fail(profiles[0], ZERO, "rank probabilities increase somewhere")
    else:
        for v in profiles:
            alloc = rule.allocate(v)
            for i in range(n):
                for x in _deviations(v, i, grid_values):
                    mono.checked += 1
                    other = rule.allocate(v.with_value(i, x))[i]
                    if (x > v.values[i] and other < alloc[i]) or (x < v.values[i] and other > alloc[i]):
                        mono.fail(v, other - alloc[i], f"agent {i} allocation not monotone at own value {x}")
    report.checks.append(mono)

    residual = CheckResult("residual_balance")
    if ranking:
        ok, prop_residual = is_implementable(rule)
        report.notes["implementability_residual"] = render_rational(prop_residual)
    for v in profiles:
        if v.zero_agents:
            continue
        residual.checked += 1
        r = check_residual_balance(rule, v)
        if r != 0:
            residual.fail(v, r, "alternating subset sum of revenues is nonzero")
    report.checks.append(residual)

    bb = CheckResult("budget_balance")
    sym = CheckResult("symmetry")
    re_check = CheckResult("revenue_equivalence")
    item3 = CheckResult("zero_report_utility_identity")
    for v in profiles:
        p = pay(v)
        total = sum(p, ZERO)
        bb.checked += 1
        if total != 0:
            bb.fail(v, total, "payments do not sum to zero")
        alloc = rule.allocate(v)
        for _, members in v.groups:
            if len(members) > 1:
                sym.checked += 1
                a = members[0]
                for b in members[1:]:
                    if p[a] != p[b] or alloc[a] != alloc[b]:
                        sym.fail(v, p[a] - p[b], f"agents {a} and {b} report equal values but are treated differently")
        elementary = revenue_view(rule, v)
        zero_report_utility = ZERO
        for i in range(n):
            p0 = pay(v.with_value(i, ZERO))[i]
            zero_report_utility -= p0
            re_check.checked += 1
            gap = p[i] - p0 - elementary.per_agent[i]
            if gap != 0:
                re_check.fail(v, gap, f"agent {i}: p_i(v) - p_i(0, v_-i) differs from the elementary payment")
        item3.checked += 1
        if zero_report_utility != elementary.total:
            item3.fail(v, zero_report_utility - elementary.total, "sum of zero-report utilities differs from R(v)")
    report.checks += [bb, sym, re_check, item3]

    if dsic:
        ic = CheckResult("dsic")
        for v in _sample(profiles, dsic_sample):
            p = pay(v)
            alloc = rule.allocate(v)
            for i in range(n):
                truthful = v.values[i] * alloc[i] - p[i]
                for x in _deviations(v, i, grid_values):
                    w = v.with_value(i, x)
                    lie = v.values[i] * rule.allocate(w)[i] - pay(w)[i]
                    ic.checked += 1
                    if lie > truthful:
                        ic.fail(v, truthful - lie, f"agent {i} gains by reporting {render_rational(x)}")
        report.checks.append(ic)
    return report


def check_expost_ir(rule, grid=DEFAULT_GRID) -> VerificationReport:
    """Sweep ``p_i(0, v_-i) <= 0`` and nonnegative realized utilities.

    For two-step rules the report notes whether the sufficient condition
    ``2 ell <= n + 1`` holds. When it does not, the sweep is a counterexample
    search and its outcome is reported without any claim beyond the grid.
    """
    n = rule.n
    profiles, described, _ = _profiles(grid, n)
    report = VerificationReport(described)
    if isinstance(rule, RankingRule):
        ok, residual = is_implementable(rule)
        if not ok:
            raise ValueError(f"rule is not implementable (residual {residual})")
    pay = _Payments(rule, check=True)

    zero_report = CheckResult("zero_report_payment_nonpositive")
    util = CheckResult("utilities_nonnegative")
    for v in profiles:
        p = pay(v)
        alloc = rule.allocate(v)
        for i in range(n):
            u = v.values[i] * alloc[i] - p[i]
            util.checked += 1
            if u < 0:
                util.fail(v, u, f"agent {i} has negative utility")
            w = v.with_value(i, ZERO)
            p0 = pay(w)[i]
            zero_report.checked += 1
            if p0 > 0:
                zero_report.fail(w, p0, f"agent {i} pays {render_rational(p0)} after reporting zero")
    report.checks += [zero_report, util]

    two_step = TwoStepRule.from_rule(rule) if isinstance(rule, RankingRule) else None
    if two_step is not None:
        sufficient = 2 * two_step.ell <= n + 1
        report.notes["two_step_ell"] = two_step.ell
        report.notes["sufficient_condition_2ell_le_n_plus_1"] = sufficient
        if not sufficient:
            witness = next((c for c in report.checks if not c.passed), None)
            if witness is None:
                finding = f"no violation on {len(profiles)} swept profiles; nothing is claimed beyond them"
            else:
                where = ",".join(witness.to_json()["counterexample"])
                finding = f"{witness.name} violated at ({where})"
            report.notes["exploratory_search"] = finding
    return report
