//! Convergence diagnostics: spectra of the expected update matrix, Lyapunov
//! solves, rate bounds, increment statistics, trace metrics and the
//! stationary-point residual of the offset estimates.

mod fixed_point;
mod metrics;
mod rate;
mod spectral;
mod stats;

pub use fixed_point::{fixed_point_residual, initial_bias, mixing_weights, FixedPointReport};
pub use metrics::{
    corrected, mean_square_disagreement, offset_cauchy_ratios, scaled_disagreement, Metrics,
};
pub use rate::{applied_exponent, rate_bound, rate_bound_from_parts, variant_constant, RateBound};
pub use spectral::{
    build_b_bar, lyapunov_residual, lyapunov_solve, spectral_abscissa, spectral_check,
    SpectralReport, ZERO_TOL,
};
pub use stats::{increment_stats, pooled_increment_ratio, update_fractions, IncrementStats};
