use std::io::Write;

use crate::clock::CorrectionState;
use crate::engine::Trace;
use crate::error::{Error, Result};
use crate::topology::Network;

/// Per-snapshot disagreement measures of the corrected clocks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub k: Vec<u64>,
    pub t_abs: Vec<f64>,
    /// `max |g_i - g_j|`.
    pub drift_spread: Vec<f64>,
    /// `(1/n) sum (g_i - mean g)^2`.
    pub msd: Vec<f64>,
    /// `max |f_i - f_j|`.
    pub offset_dispersion: Vec<f64>,
    /// `max |(g_i - g_j) t + f_i - f_j|` at the snapshot's absolute time.
    pub vclock_gap: Vec<f64>,
    /// `max |c_i - c_j|`.
    pub c_spread: Vec<f64>,
    /// `max |f_i|`.
    pub max_abs_offset: Vec<f64>,
}

fn range(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Mean square disagreement of a set of values.
pub fn mean_square_disagreement(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

/// Corrected drifts and offsets `(g_i, f_i)` of one estimate vector.
pub fn corrected(net: &Network, estimates: &[CorrectionState]) -> (Vec<f64>, Vec<f64>) {
    estimates
        .iter()
        .zip(net.clocks())
        .map(|(e, c)| (e.corrected_drift(c), e.corrected_offset(c)))
        .unzip()
}

impl Metrics {
    pub fn from_trace(trace: &Trace, net: &Network) -> Self {
        let mut m = Metrics::default();
        for snap in &trace.snapshots {
            m.push(net, snap.k, snap.t_abs, &snap.estimates);
        }
        m
    }

    pub fn push(&mut self, net: &Network, k: u64, t: f64, estimates: &[CorrectionState]) {
        let (g, f) = corrected(net, estimates);
        self.k.push(k);
        self.t_abs.push(t);
        self.drift_spread.push(range(g.iter().copied()));
        self.msd.push(mean_square_disagreement(&g));
        self.offset_dispersion.push(range(f.iter().copied()));
        self.vclock_gap.push(range(g.iter().zip(&f).map(|(g, f)| g * t + f)));
        self.c_spread.push(range(estimates.iter().map(|e| e.c_hat)));
        self.max_abs_offset.push(f.iter().fold(0.0, |m, x| f64::max(m, x.abs())));
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Index of the last snapshot with `k <= at`.
    pub fn index_at(&self, at: u64) -> Option<usize> {
        self.k.iter().rposition(|&k| k <= at)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "k",
            "t_abs",
            "drift_spread",
            "msd",
            "offset_dispersion",
            "vclock_gap",
            "c_spread",
            "max_abs_offset",
        ])?;
        for i in 0..self.len() {
            w.write_record([
                self.k[i].to_string(),
                self.t_abs[i].to_string(),
                self.drift_spread[i].to_string(),
                self.msd[i].to_string(),
                self.offset_dispersion[i].to_string(),
                self.vclock_gap[i].to_string(),
                self.c_spread[i].to_string(),
                self.max_abs_offset[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `k^(2 rho) msd(k)` for every snapshot.
pub fn scaled_disagreement(metrics: &Metrics, rho: f64) -> Result<Vec<f64>> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be > 0, got {rho}")));
    }
    Ok(metrics
        .k
        .iter()
        .zip(&metrics.msd)
        .map(|(&k, &m)| (k as f64).powf(2.0 * rho) * m)
        .collect())
}

/// Largest change of each node's corrected offset over snapshots with
/// `k >= from_k`, relative to its final magnitude.
pub fn offset_cauchy_ratios(trace: &Trace, net: &Network, from_k: u64) -> Vec<f64> {
    let last = match trace.snapshots.last() {
        Some(s) => corrected(net, &s.estimates).1,
        None => return Vec::new(),
    };
    let mut worst = vec![0.0f64; net.n()];
    for snap in trace.snapshots.iter().filter(|s| s.k >= from_k) {
        let (_, f) = corrected(net, &snap.estimates);
        for i in 0..net.n() {
            worst[i] = worst[i].max((f[i] - last[i]).abs());
        }
    }
    worst.iter().zip(&last).map(|(w, f)| w / f.abs()).collect()
}
