from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from rankmech.exactnum import ONE, ZERO, as_rational
from rankmech.revenue import (
    allocation_integral,
    elementary_payment,
    revenue_closed_form_0generic,
    revenue_view,
    total_revenue,
    total_revenue_sorted,
)
from rankmech.rules import RankingRule, ValuationProfile, efficient_rule, equal_share_rule, gl_rule, profile, two_step_rule
from rankmech.verify import StepAllocationRule
from oracles import elementary, integral, quadrature, q


def test_integral_examples_match_quadrature():
    gl4, v = gl_rule(4), profile(8, 4, 2, 1)
    assert quadrature(gl4.pi, v.values, 0) == pytest.approx(3.5, abs=1e-2)
    assert allocation_integral(gl4, v, 0) == integral(gl4.pi, v.values, 0) == F(7, 2)
    es3, w = equal_share_rule(3), profile(6, 5, 1)
    assert quadrature(es3.pi, w.values, 1) == pytest.approx(5 / 3, abs=1e-2)
    assert allocation_integral(es3, w, 1) == F(5, 3)


def test_integral_zero_value_agent():
    assert allocation_integral(gl_rule(4), profile(3, 0, 2, 1), 1) == 0


def test_revenue_examples():
    assert revenue_view(gl_rule(4), profile(8, 4, 2, 1)).total == 3
    assert total_revenue(gl_rule(5), profile(0, 0, 0, 0, 0)) == 0
    assert total_revenue(gl_rule(3), profile(7, 0, 0)) == 0


def test_revenue_view_json():
    view = revenue_view(gl_rule(4), profile(8, 4, 2, 1))
    assert view.to_json() == {"per_agent": ["5/2", "1/2", "0", "0"], "total": "3"}
    assert view.per_agent == tuple(elementary(gl_rule(4).pi, (8, 4, 2, 1)))


def test_closed_form_examples():
    assert revenue_closed_form_0generic(gl_rule(4), profile(8, 4, 2, 1)) == 3
    assert revenue_closed_form_0generic(gl_rule(4), profile(0, 5, 0, 0)) == 0
    with pytest.raises(ValueError):
        revenue_closed_form_0generic(gl_rule(4), profile(2, 2, 1, 0))


def test_two_step_closed_form_shape():
    rule = two_step_rule(F(12, 13), 4, 9)
    pi1, pi2 = F(12, 13), F(1, 39)
    v = profile(9, 8, 7, 6, 5, 4, 3, 2, 1)
    assert total_revenue(rule, v) == (pi1 - pi2) * 8 + 4 * pi2 * 5


def test_efficient_rule_is_second_price():
    v = profile(5, 9, 2, 7)
    assert revenue_view(efficient_rule(4), v).per_agent == (0, 7, 0, 0)


@st.composite
def rule_profile(draw, max_n=10, generic=False):
    n = draw(st.integers(2, max_n))
    weights = sorted(draw(st.lists(st.integers(0, 9), min_size=n, max_size=n)), reverse=True)
    total = sum(weights) + draw(st.integers(0, 4)) or 1
    rule = RankingRule([as_rational(w) / total for w in weights])
    value = st.fractions(min_value=0, max_value=2, max_denominator=12)
    if generic:
        pos = draw(st.lists(value.filter(lambda x: x > 0), min_size=1, max_size=n, unique=True))
        vals = pos + [F(0)] * (n - len(pos))
        vals = draw(st.permutations(vals))
    else:
        vals = draw(st.lists(value, min_size=n, max_size=n))
    return rule, ValuationProfile(vals)


@given(rule_profile(generic=True))
def test_closed_form_equals_integral_form(case):
    rule, v = case
    assert revenue_closed_form_0generic(rule, v) == revenue_view(rule, v).total


@given(rule_profile(max_n=7))
def test_per_agent_matches_oracle_and_is_nonnegative(case):
    rule, v = case
    per_agent = revenue_view(rule, v).per_agent
    assert list(per_agent) == elementary(rule.pi, v.values)
    assert all(r >= 0 for r in per_agent)
    assert total_revenue_sorted(rule, tuple(sorted(v.values))) == sum(per_agent, ZERO)


def test_continuity_at_ties():
    rule = RankingRule(["1/2", "1/4", "1/8", "1/8", "0"])
    tie_profiles = [profile(1, 1, F(1, 2), F(1, 2), 0), profile(F(2, 3), F(2, 3), F(2, 3), F(1, 3), F(1, 3)), profile(1, 0, 0, 0, 0)]
    for v in tie_profiles:
        base = total_revenue(rule, v)
        for delta in (F(1, 10), F(1, 100), F(1, 1000)):
            for i in range(v.n):
                for sign in (1, -1):
                    x = v.values[i] + sign * delta
                    if x < 0:
                        continue
                    moved = total_revenue(rule, v.with_value(i, x))
                    assert abs(moved - base) <= delta * v.n * max(max(v.values), ONE)


def test_step_rule_callback_matches_ranking_rule():
    rule = RankingRule(["1/2", "1/3", "1/6", "0"])
    wrapped = StepAllocationRule(4, lambda vals: rule.allocate(ValuationProfile(vals)))
    for v in (profile(3, 1, 2, 0), profile(1, 1, 2, 2), profile(5, 4, 3, 2)):
        assert revenue_view(wrapped, v).per_agent == revenue_view(rule, v).per_agent
        assert elementary_payment(wrapped, v, 0) == elementary_payment(rule, v, 0)
