"""Local-time laboratory for killed and reflected lattice random walks."""

from walklt._core import (  # noqa: F401
    IncrementLaw,
    LadderLaw,
    RenewalTable,
    LocalTimeFieldSample,
    TestReport,
    bundled_law,
    bundled_law_names,
    parse_law,
    validate,
    norming,
    inverse_norming,
    exact_ladder_pmf,
    renewal_table,
    compute_u,
    green_sum,
    scaled_green,
    hitting_prob,
    simulate_killed,
    simulate_reflected_direct,
    simulate_reflected_iid,
    rescaled_field_values,
    a_20_closed,
    a_20_quadrature,
    kac_moment_value,
    exponential_limit_sf,
    field_marginal_laplace,
    knight_kernel,
    exact_q_pmf,
    gw_extinction_prob,
    fit_geometric,
    tail_slope,
    derive_seed,
    run_experiment,
    experiment_ids,
)

__all__ = [name for name in dir() if not name.startswith("_")]
