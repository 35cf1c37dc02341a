"""Stochastic market-clearing engine under wind uncertainty."""

from windclear._core import (  # noqa: F401
    CaseValidationError,
    ClearingResult,
    EquilibriumReport,
    InfeasibleError,
    NetworkClearingResult,
    NoConvergenceError,
    PriceSet,
    ScenarioReport,
    Settlement,
    SystemCase,
    aggregate_wind,
    apply_policy,
    clear,
    clear_locational_ldtcc,
    clear_network_ldtcc,
    closed_form_prices_ldtcc,
    derive_omega_star,
    evaluate,
    expected_overload,
    extract_prices,
    normal_cdf,
    normal_pdf,
    normal_quantile,
    rate_function,
    settle,
    truncated_moments,
    verify_equilibrium,
)

__version__ = "0.1.0"
