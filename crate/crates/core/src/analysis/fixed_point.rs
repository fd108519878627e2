use nalgebra::{DMatrix, DVector};

use super::metrics::{corrected, offset_cauchy_ratios};
use crate::engine::Trace;
use crate::sync::{OffsetVariant, SyncConfig};
use crate::topology::{expected_gamma_d, expected_laplacian, Network, ProbabilityProfile};

/// How far the final offset estimates are from the stationary equations.
#[derive(Debug, Clone)]
pub struct FixedPointReport {
    /// `||M h|| / ||h||`.
    pub residual: f64,
    /// Empirical consensus drift: mean of the final corrected drifts.
    pub chi: f64,
    /// Stacked `[f ; c + chi e]`, `e` the per-node initial-sample bias.
    pub h: DVector<f64>,
    /// Weighted consensus value of the compensation parameters (consensus
    /// variant only).
    pub c_consensus: Option<f64>,
    /// `max |c_i - c_j|` at the end.
    pub c_spread: f64,
    /// Largest relative change of any corrected offset over the last decade.
    pub cauchy_ratio: f64,
    /// `cauchy_ratio <= 0.05`.
    pub converged: bool,
}

/// Per-receiver bias `e_i` of the stationary offset equation: the
/// weight-averaged `xi_j / alpha_j - xi_i / alpha_i - delta` over the first
/// reception of every in-link.
pub fn initial_bias(net: &Network, profile: &ProbabilityProfile, trace: &Trace) -> DVector<f64> {
    let mut num = DVector::<f64>::zeros(net.n());
    let mut den = DVector::<f64>::zeros(net.n());
    for (idx, arc) in net.arcs().iter().enumerate() {
        let Some(s) = trace.initial_samples[idx] else { continue };
        let w = arc.gamma * profile.pi_arc[(arc.to, arc.from)];
        let alpha_j = net.node(arc.from).clock.alpha;
        let alpha_i = net.node(arc.to).clock.alpha;
        num[arc.to] += w * (s.xi_sender / alpha_j - s.xi_receiver / alpha_i - s.delay);
        den[arc.to] += w;
    }
    num.zip_map(&den, |n, d| if d > 0.0 { n / d } else { 0.0 })
}

/// Left fixed vector of the expected compensation mixing matrix, normalized
/// to sum 1. Uniform when no mixing happens.
pub fn mixing_weights(net: &Network, profile: &ProbabilityProfile, offset: &OffsetVariant) -> DVector<f64> {
    let n = net.n();
    let mut lap = DMatrix::zeros(n, n);
    for arc in net.arcs() {
        if arc.gamma == 0.0 {
            continue;
        }
        let w = profile.pi_arc[(arc.to, arc.from)] * (1.0 - offset.self_weight(arc.to));
        lap[(arc.to, arc.from)] += w;
        lap[(arc.to, arc.to)] -= w;
    }
    if lap.abs().max() == 0.0 {
        return DVector::from_element(n, 1.0 / n as f64);
    }
    // Left null vector: right singular vector of lap^T for the smallest value.
    let svd = lap.transpose().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let v: DVector<f64> = v_t.row(n - 1).transpose();
    let v = if v.sum() < 0.0 { -v } else { v };
    &v / v.sum()
}

/// Relative residual of the stationary offset equations at the end of
/// `trace`.
///
/// With the drifts at consensus `chi`, each link's offset error settles at
/// `f_j - f_i + c_i + chi e_ij`, so the expected update vanishes when
/// `Gamma f + Gamma_d (c + chi e) = 0`. For the consensus variant `c` is
/// first replaced by its weighted consensus value, and the residual also
/// carries the weighted sum of the first block.
pub fn fixed_point_residual(
    net: &Network,
    profile: &ProbabilityProfile,
    trace: &Trace,
    sync: &SyncConfig,
) -> FixedPointReport {
    let n = net.n();
    let finals = &trace.final_state;
    let (g, f) = corrected(net, finals);
    let chi = g.iter().sum::<f64>() / n as f64;
    let f = DVector::from_vec(f);
    let c = DVector::from_iterator(n, finals.iter().map(|e| e.c_hat));
    let bias = initial_bias(net, profile, trace);
    let lap = expected_laplacian(net, profile);
    let gd = expected_gamma_d(net, profile);

    let (c_used, c_consensus, extra) = match &sync.offset {
        OffsetVariant::Plain => (c.clone(), None, None),
        variant @ OffsetVariant::Consensus { .. } => {
            let phi = mixing_weights(net, profile, variant);
            let con = phi.dot(&c);
            (DVector::from_element(n, con), Some(con), Some(phi))
        }
    };
    let second = &c_used + &bias * chi;
    let block = &lap * &f + &gd * &second;
    let mut residual_sq = block.norm_squared();
    if let Some(phi) = extra {
        residual_sq += phi.dot(&block).powi(2);
    }
    let mut h = DVector::zeros(2 * n);
    h.rows_mut(0, n).copy_from(&f);
    h.rows_mut(n, n).copy_from(&second);

    let k = trace.updates();
    let cauchy_ratio = offset_cauchy_ratios(trace, net, k - k / 10)
        .into_iter()
        .fold(0.0, f64::max);
    let c_spread = c.max() - c.min();
    FixedPointReport {
        residual: residual_sq.sqrt() / h.norm(),
        chi,
        h,
        c_consensus,
        c_spread,
        cauchy_ratio,
        converged: cauchy_ratio <= 0.05,
    }
}
