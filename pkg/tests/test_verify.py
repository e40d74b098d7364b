from fractions import Fraction as F

import pytest

from oracles import elementary, q
from rankmech.harness import random_profiles, structured_tie_profiles
from rankmech.optimal import r_optimal_rule
from rankmech.rules import (
    RankingRule,
    ValuationProfile,
    allocate,
    efficient_rule,
    gl_rule,
    implementable_two_step_pi1,
    two_step_rule,
)
from rankmech.verify import (
    DEFAULT_GRID,
    GridSpec,
    StepAllocationRule,
    check_expost_ir,
    check_residual_balance,
    check_satisfactory,
    parse_grid_spec,
)


def oracle_residual(pi, values):
    n = len(values)
    total = F(0)
    for mask in range(1 << n):
        w = [0 if mask >> i & 1 else x for i, x in enumerate(values)]
        total += (-1) ** bin(mask).count("1") * sum(elementary(pi, w))
    return total


def test_residual_balance_examples():
    v = ValuationProfile([3, 2, 1])
    assert check_residual_balance(gl_rule(3), v) == 0
    r = check_residual_balance(efficient_rule(3), v)
    assert r != 0 and q(r) == oracle_residual([1, 0, 0], [3, 2, 1])


@pytest.mark.parametrize("pi", [(1, 0, 0), ("1/2", "1/4", "1/4"), ("2/3", "1/3", 0), ("1/3", "1/3", "1/3")])
def test_residual_balance_matches_oracle(pi):
    rule = RankingRule(pi)
    for v in random_profiles(3, 15, seed=5, denom_bound=9, zero_free=True):
        assert q(check_residual_balance(rule, v)) == oracle_residual(pi, v.values)


def test_residual_balance_errors():
    with pytest.raises(ValueError):
        check_residual_balance(gl_rule(3), ValuationProfile([1, 0, 2]))
    with pytest.raises(ValueError):
        check_residual_balance(gl_rule(21), ValuationProfile([1] * 21))


def test_implementable_rules_balanced_on_random_profiles():
    for n in (4, 6, 9):
        rule = r_optimal_rule(n).pi_star
        for v in random_profiles(n, 20, seed=n, zero_free=True):
            assert check_residual_balance(rule, v) == 0


def test_parse_grid_spec():
    g = parse_grid_spec("values=0,1/3,2/3,1;exhaustive")
    assert g == DEFAULT_GRID
    assert len(g.profiles(3)) == 64
    r = parse_grid_spec("random=7;denom=5", seed=11)
    assert (r.count, r.denom, r.seed) == (7, 5, 11)
    assert parse_grid_spec("random=7;denom=5;seed=2").seed == 2
    assert r.profiles(4) == r.profiles(4)
    assert g.describe() == "values=0,1/3,2/3,1;exhaustive"


@pytest.mark.parametrize("bad", ["", "values=1,2", "values=-1;exhaustive", "random=0", "random=3;random=4", "grid=1"])
def test_parse_grid_spec_errors(bad):
    with pytest.raises(ValueError):
        parse_grid_spec(bad)


def test_r_optimal_5_full_grid_passes():
    rep = check_satisfactory(r_optimal_rule(5).pi_star)
    assert rep.passed
    names = [c.name for c in rep.checks]
    assert names == [
        "monotonicity", "residual_balance", "budget_balance", "symmetry",
        "revenue_equivalence", "zero_report_utility_identity", "dsic",
    ]
    assert rep.check("dsic").checked > 0


def test_efficient_rule_fails_with_witness():
    rep = check_satisfactory(efficient_rule(3))
    assert rep.check("monotonicity").passed
    res = rep.check("residual_balance")
    assert not res.passed and res.counterexample is not None and res.residual != 0
    assert not rep.check("budget_balance").passed


def test_non_implementable_reports_prop_residual():
    rep = check_satisfactory(RankingRule(["1/2", "1/4", "1/4"]), dsic=False)
    assert rep.notes["implementability_residual"] == "-1/4"
    assert not rep.check("residual_balance").passed
    js = rep.to_json()
    assert js["passed"] is False and js["checks"][1]["counterexample"] is not None


def test_step_allocation_rule_matches_ranking_rule():
    def fn(values):
        return allocate(gl_rule(3), ValuationProfile(values))

    cb = StepAllocationRule(3, fn, name="gl")
    rep = check_satisfactory(cb, parse_grid_spec("values=0,1/2,1;exhaustive"))
    assert rep.passed, rep.to_json()
    assert rep.check("monotonicity").checked > 1


def test_step_allocation_threshold_rule_fails_budget_balance():
    # give the good to the top agent only if they clear a reserve of 1/2
    def fn(values):
        top = max(values)
        winners = [i for i, x in enumerate(values) if x == top]
        if top < F(1, 2):
            return [0] * len(values)
        return [F(1, len(winners)) if i in winners else 0 for i in range(len(values))]

    rule = StepAllocationRule(3, fn, thresholds=["1/2"])
    assert rule.allocation_integral(ValuationProfile([1, 0, 0]), 0) == F(1, 2)
    rep = check_satisfactory(rule, parse_grid_spec("values=0,1/4,3/4,1;exhaustive"), dsic=False)
    assert rep.check("monotonicity").passed
    assert not rep.check("budget_balance").passed


def test_expost_ir_examples():
    rep = check_expost_ir(r_optimal_rule(9).pi_star, parse_grid_spec("random=40;denom=16;seed=1"))
    assert rep.passed
    assert rep.notes["two_step_ell"] == 4 and rep.notes["sufficient_condition_2ell_le_n_plus_1"] is True
    assert check_expost_ir(gl_rule(4)).passed
    explore = check_expost_ir(two_step_rule(implementable_two_step_pi1(5, 4), 4, 5))
    assert explore.notes["sufficient_condition_2ell_le_n_plus_1"] is False
    assert "exploratory_search" in explore.notes
    with pytest.raises(ValueError):
        check_expost_ir(efficient_rule(3))


def test_larger_n_random_plus_structured_ties():
    n = 8
    rule = r_optimal_rule(n).pi_star
    profiles = random_profiles(n, 30, seed=3, denom_bound=16) + structured_tie_profiles(n)
    rep = check_satisfactory(rule, profiles, dsic_sample=4)
    assert rep.passed
    assert rep.grid_spec.startswith("explicit list")
