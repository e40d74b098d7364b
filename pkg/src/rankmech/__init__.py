"""Exact budget-balanced, DSIC, symmetric ranking mechanisms for one object."""

__version__ = "0.1.0"

from .exactnum import (
    ONE,
    ZERO,
    Rational,
    alternating_binomial_prefix,
    as_rational,
    binomial,
    parse_rational,
    psi,
    render_rational,
    to_decimal_string,
)
from .rules import (
    DimensionError,
    RankingRule,
    TwoStepRule,
    ValuationProfile,
    allocate,
    efficient_rule,
    equal_share_rule,
    fosd_dominates,
    gl_rule,
    implementability_residual,
    implementable_two_step_pi1,
    is_implementable,
    is_monotone_ranking,
    profile,
    rank_structure,
    two_step_rule,
)
from .revenue import (
    RevenueView,
    allocation_integral,
    elementary_payment,
    revenue_closed_form_0generic,
    revenue_view,
    total_revenue,
)
from .payments import (
    NotImplementableError,
    Outcome,
    payments_recursive,
    payments_subset_formula,
    payments_two_step,
    run_mechanism,
)
from .lp import InfeasibleError, LinearProgram, LPError, UnboundedError, optimal_vertices, solve_lp
from .optimal import (
    DualCertificate,
    OptimalRuleReport,
    build_dp_rank,
    build_lp_rank,
    check_dual_certificate,
    closed_form_ell,
    dual_certificate,
    is_dominated_fosd,
    mu_sampler,
    r_optimal_rule,
    r_pareto_bounds_check,
    select_ell,
    welfare_ratio,
    worst_case_efficiency,
)
from .harness import (
    ConvergenceRow,
    convergence_table,
    gl_convergence_threshold,
    random_profiles,
    sample_lottery,
    sample_lotteries,
)
from .verify import (
    CheckResult,
    GridSpec,
    StepAllocationRule,
    VerificationReport,
    check_expost_ir,
    check_residual_balance,
    check_satisfactory,
    parse_grid_spec,
)
