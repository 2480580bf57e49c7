"""Bayesian Wardrop equilibria for a two-route network with an incident-prone
route and heterogeneously informed travelers: belief construction, regime
classification, closed-form equilibria, equilibrium/baseline/optimum costs,
the value of information, and independent numerical oracles.
"""

from .beliefs import (
    BeliefTable,
    MarginalTypeDist,
    belief_conditional_ck,
    belief_marginal_ck,
    belief_uninformative,
    expected_route_cost,
    marginal_type_dist,
    posterior_state,
)
from .costs import (
    CostReport,
    CrosscheckRow,
    SocOptSolution,
    analytic_cost_crosscheck,
    baseline_costs,
    cost_report,
    expected_population_cost,
    projected_descent_socopt,
    realized_population_state_cost,
    social_costs,
    social_optimum,
)
from .equilibrium import (
    ProfileVerdict,
    Regime,
    StrategyProfile,
    classify,
    enumerate_profiles,
    regime_boundaries,
    solve_bwe,
    wardrop_residual,
)
from .model import (
    EQUILIBRIUM_TYPES,
    DerivedConstants,
    InfoEnvironment,
    NetworkParams,
    PlayerType,
    State,
    ValidationError,
    derived_constants,
    latency,
    route_slope,
    validate,
)
from .oracle import (
    GridScanResult,
    OracleConfig,
    OracleConvergenceError,
    best_response,
    brute_force_socopt,
    grid_scan,
    solve_fixed_point,
)
from .value import (
    Theorem1Report,
    Theorem2Report,
    ValueReport,
    lambda_min,
    lambda_tilde,
    theorem2_grid,
    value_report,
    verify_theorem1,
    verify_theorem2,
)

__all__ = [
    "EQUILIBRIUM_TYPES",
    "BeliefTable",
    "CostReport",
    "CrosscheckRow",
    "DerivedConstants",
    "GridScanResult",
    "InfoEnvironment",
    "MarginalTypeDist",
    "NetworkParams",
    "OracleConfig",
    "OracleConvergenceError",
    "PlayerType",
    "ProfileVerdict",
    "Regime",
    "SocOptSolution",
    "State",
    "StrategyProfile",
    "Theorem1Report",
    "Theorem2Report",
    "ValidationError",
    "ValueReport",
    "analytic_cost_crosscheck",
    "baseline_costs",
    "belief_conditional_ck",
    "belief_marginal_ck",
    "belief_uninformative",
    "best_response",
    "brute_force_socopt",
    "classify",
    "cost_report",
    "derived_constants",
    "enumerate_profiles",
    "expected_population_cost",
    "expected_route_cost",
    "grid_scan",
    "lambda_min",
    "lambda_tilde",
    "latency",
    "marginal_type_dist",
    "posterior_state",
    "projected_descent_socopt",
    "realized_population_state_cost",
    "regime_boundaries",
    "route_slope",
    "social_costs",
    "social_optimum",
    "solve_bwe",
    "solve_fixed_point",
    "theorem2_grid",
    "validate",
    "value_report",
    "verify_theorem1",
    "verify_theorem2",
    "wardrop_residual",
]

__version__ = "0.1.0"
