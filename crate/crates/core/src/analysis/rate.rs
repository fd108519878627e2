use nalgebra::DMatrix;

use super::spectral::{build_b_bar, lyapunov_solve, spectral_check, ZERO_TOL};
use crate::error::{Error, Result};
use crate::sync::DriftVariant;
use crate::topology::{Network, ProbabilityProfile};

/// Sufficient rate exponent for the drift disagreement: `k^(zeta d)` times
/// the mean square disagreement tends to zero for every `d < d_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateBound {
    pub variant: DriftVariant,
    pub zeta_prime: f64,
    /// Step exponent actually applied: `zeta'` or `1 + zeta'`.
    pub zeta: f64,
    /// `lambda_min(Q) / lambda_max(R)`.
    pub r: f64,
    pub q: f64,
    pub d_max: f64,
    pub zeta_d_max: f64,
}

/// Variant constant `q` of the bound.
pub fn variant_constant(variant: &DriftVariant, net: &Network) -> f64 {
    match *variant {
        DriftVariant::FixedLag { lag } => {
            let fastest = net
                .arcs()
                .iter()
                .map(|a| net.node(a.from).rate * a.p_hear)
                .fold(0.0, f64::max);
            lag as f64 / fastest
        }
        DriftVariant::Proportional { fraction } => (1.0 - fraction) / net.total_rate(),
        DriftVariant::Anchored { .. } => 1.0 / net.total_rate(),
    }
}

/// Applied drift step exponent for `variant`.
pub fn applied_exponent(variant: &DriftVariant, zeta_prime: f64) -> f64 {
    if variant.has_growing_increments() {
        1.0 + zeta_prime
    } else {
        zeta_prime
    }
}

/// Bound from precomputed parts: the consensus block `b_star`, the chosen
/// `Q` and the variant constant `q`.
pub fn rate_bound_from_parts(
    variant: &DriftVariant,
    zeta_prime: f64,
    b_star: &DMatrix<f64>,
    q_mat: &DMatrix<f64>,
    q: f64,
) -> Result<RateBound> {
    if !(zeta_prime > 0.5 && zeta_prime <= 1.0) {
        return Err(Error::InvalidParameter(format!("zeta' must be in (1/2, 1], got {zeta_prime}")));
    }
    let zeta = applied_exponent(variant, zeta_prime);
    let r_mat = lyapunov_solve(b_star, q_mat)?;
    let lambda_min_q = q_mat.symmetric_eigenvalues().min();
    let lambda_max_r = r_mat.symmetric_eigenvalues().max();
    let r = lambda_min_q / lambda_max_r;
    let d_max = if zeta_prime < 1.0 {
        let zd = match variant {
            DriftVariant::FixedLag { .. } => zeta_prime - 0.5,
            DriftVariant::Proportional { .. } => 0.5 + zeta_prime,
            DriftVariant::Anchored { .. } => zeta_prime,
        };
        zd / zeta
    } else {
        match variant {
            DriftVariant::FixedLag { .. } => f64::min(0.5, 2.0 * q * r),
            DriftVariant::Proportional { .. } => f64::min(0.75, q * r),
            DriftVariant::Anchored { .. } => f64::min(0.5, q * r),
        }
    };
    Ok(RateBound {
        variant: *variant,
        zeta_prime,
        zeta,
        r,
        q,
        d_max,
        zeta_d_max: zeta * d_max,
    })
}

/// Rate bound for `variant` on `net`; `q_mat` defaults to the identity.
pub fn rate_bound(
    variant: &DriftVariant,
    zeta_prime: f64,
    net: &Network,
    profile: &ProbabilityProfile,
    q_mat: Option<&DMatrix<f64>>,
) -> Result<RateBound> {
    let zeta = applied_exponent(variant, zeta_prime);
    let b = build_b_bar(net, profile, zeta)?;
    let report = spectral_check(&b, ZERO_TOL);
    if !report.hurwitz_ok {
        return Err(Error::NotHurwitz(report.max_real));
    }
    let m = report.b_star.nrows();
    let identity = DMatrix::identity(m, m);
    let q_mat = q_mat.unwrap_or(&identity);
    rate_bound_from_parts(variant, zeta_prime, &report.b_star, q_mat, variant_constant(variant, net))
}
