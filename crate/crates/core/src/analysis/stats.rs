use crate::engine::Trace;
use crate::sync::{DriftVariant, UpdateKind};
use crate::topology::Network;

/// Absolute-time spans `t_l - t_m` between the two broadcasts a drift
/// update compares, against the thinned-Poisson prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementStats {
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    /// Mean of `(l - m) / (mu_j p_ij)` over the same samples.
    pub expected_mean: f64,
    /// Erlang variance `(l - m) / (mu_j p_ij)^2` averaged over the samples,
    /// plus the spread of the per-sample expected means.
    pub expected_variance: f64,
}

impl IncrementStats {
    pub fn mean_ratio(&self) -> f64 {
        self.mean / self.expected_mean
    }
}

/// Sender times of every recorded reception on `arc`, indexed by `l`.
fn send_times(trace: &Trace, arc: usize) -> Vec<f64> {
    trace
        .records
        .iter()
        .filter(|r| r.arc == arc && r.kind != UpdateKind::Ignored)
        .map(|r| r.t_sent)
        .collect()
}

/// Increment statistics on `arc` over drift updates with `k >= min_k`.
pub fn increment_stats(
    trace: &Trace,
    net: &Network,
    arc: usize,
    variant: &DriftVariant,
    warmup: bool,
    min_k: u64,
) -> IncrementStats {
    let times = send_times(trace, arc);
    let a = net.arc(arc);
    let rate = net.node(a.from).rate * a.p_hear;
    let mut spans = Vec::new();
    let mut gaps = Vec::new();
    for r in &trace.records {
        if r.arc != arc || r.kind != UpdateKind::Full || r.k < min_k {
            continue;
        }
        let l = r.link_seq;
        let Some(m) = variant.past_index(l, warmup) else { continue };
        spans.push(times[l as usize] - times[m as usize]);
        gaps.push((l - m) as f64);
    }
    summarize(&spans, &gaps, rate)
}

fn summarize(spans: &[f64], gaps: &[f64], rate: f64) -> IncrementStats {
    let n = spans.len();
    if n == 0 {
        return IncrementStats {
            samples: 0,
            mean: f64::NAN,
            variance: f64::NAN,
            expected_mean: f64::NAN,
            expected_variance: f64::NAN,
        };
    }
    let nf = n as f64;
    let mean = spans.iter().sum::<f64>() / nf;
    let variance = spans.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
    let expected: Vec<f64> = gaps.iter().map(|g| g / rate).collect();
    let expected_mean = expected.iter().sum::<f64>() / nf;
    let spread = expected.iter().map(|e| (e - expected_mean).powi(2)).sum::<f64>() / nf;
    let erlang = gaps.iter().map(|g| g / (rate * rate)).sum::<f64>() / nf;
    IncrementStats {
        samples: n,
        mean,
        variance,
        expected_mean,
        expected_variance: erlang + spread,
    }
}

/// `sum(observed) / sum(expected)` over every arc, with the sample count.
pub fn pooled_increment_ratio(
    trace: &Trace,
    net: &Network,
    variant: &DriftVariant,
    warmup: bool,
    min_k: u64,
) -> (f64, usize) {
    let (mut observed, mut expected, mut count) = (0.0, 0.0, 0usize);
    for arc in 0..net.arcs().len() {
        let s = increment_stats(trace, net, arc, variant, warmup, min_k);
        if s.samples > 0 {
            observed += s.mean * s.samples as f64;
            expected += s.expected_mean * s.samples as f64;
            count += s.samples;
        }
    }
    (observed / expected, count)
}

/// Empirical `nu_i(k) / k` at the end of the run.
pub fn update_fractions(trace: &Trace) -> Vec<f64> {
    let k = trace.updates().max(1) as f64;
    trace.final_nu.iter().map(|&v| v as f64 / k).collect()
}
