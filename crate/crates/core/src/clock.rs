//! Ground-truth clock model and the noise/delay sampling primitives.
//!
//! All quantities are in seconds except the drift `alpha` and the drift
//! correction `a_hat`, which are dimensionless.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default positivity floor for sampled delays.
pub const DEFAULT_DELTA_MIN: f64 = 1e-6;

/// Shape of the zero-mean noise sequences.
///
/// `Uniform` draws from `[-sqrt(3) sigma, sqrt(3) sigma]`, i.e. a bounded
/// distribution with the same standard deviation as the Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDist {
    #[default]
    Gaussian,
    Uniform,
}

impl NoiseDist {
    /// Draws one zero-mean sample with standard deviation `sigma`.
    ///
    /// Always consumes randomness, even for `sigma == 0`, so the stream
    /// position does not depend on the noise level.
    pub fn sample<R: Rng + ?Sized>(self, sigma: f64, rng: &mut R) -> f64 {
        let unit: f64 = match self {
            NoiseDist::Gaussian => StandardNormal.sample(rng),
            NoiseDist::Uniform => (rng.random::<f64>() * 2.0 - 1.0) * 3f64.sqrt(),
        };
        sigma * unit
    }
}

/// Per-node true clock parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockParams {
    /// Drift (gain), dimensionless, nonzero.
    pub alpha: f64,
    /// Offset in seconds.
    pub beta: f64,
    /// Standard deviation of the reading noise, seconds.
    pub xi_sigma: f64,
    #[serde(default)]
    pub noise: NoiseDist,
}

impl ClockParams {
    pub fn new(alpha: f64, beta: f64, xi_sigma: f64) -> Result<Self> {
        let params = Self {
            alpha,
            beta,
            xi_sigma,
            noise: NoiseDist::Gaussian,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "clock drift must be finite and nonzero, got {}",
                self.alpha
            )));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidParameter("clock offset must be finite".into()));
        }
        if !(self.xi_sigma >= 0.0 && self.xi_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "reading noise std-dev must be >= 0, got {}",
                self.xi_sigma
            )));
        }
        Ok(())
    }

    /// Noiseless reading at absolute time `t`.
    pub fn ideal_reading(&self, t: f64) -> f64 {
        self.alpha * t + self.beta
    }

    /// Reads the clock at `t`, returning `(reading, noise)`.
    pub fn read_with_noise<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> (f64, f64) {
        let xi = self.noise.sample(self.xi_sigma, rng);
        (self.ideal_reading(t) + xi, xi)
    }
}

/// Local time `alpha t + beta + xi`, with a fresh noise draw per call.
pub fn read_local_time<R: Rng + ?Sized>(params: &ClockParams, t: f64, rng: &mut R) -> f64 {
    params.read_with_noise(t, rng).0
}

/// Per-arc delay: a constant mean plus zero-mean jitter, floored at `delta_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayModel {
    pub delta_bar: f64,
    pub eta_sigma: f64,
    #[serde(default = "default_delta_min")]
    pub delta_min: f64,
    #[serde(default)]
    pub noise: NoiseDist,
}

fn default_delta_min() -> f64 {
    DEFAULT_DELTA_MIN
}

impl DelayModel {
    pub fn new(delta_bar: f64, eta_sigma: f64) -> Result<Self> {
        let model = Self {
            delta_bar,
            eta_sigma,
            delta_min: DEFAULT_DELTA_MIN,
            noise: NoiseDist::Gaussian,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_bar > 0.0 && self.delta_bar.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mean delay must be > 0, got {}",
                self.delta_bar
            )));
        }
        if !(self.eta_sigma >= 0.0 && self.eta_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delay jitter std-dev must be >= 0, got {}",
                self.eta_sigma
            )));
        }
        if !(self.delta_min > 0.0 && self.delta_min.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delay floor must be > 0, got {}",
                self.delta_min
            )));
        }
        Ok(())
    }

    /// Samples a delay, returning `(delay, eta)` where `eta` is the raw jitter
    /// draw before clamping.
    pub fn sample_with_jitter<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let eta = self.noise.sample(self.eta_sigma, rng);
        (self.delta_min.max(self.delta_bar + eta), eta)
    }
}

/// `max(delta_min, delta_bar + eta)`.
pub fn sample_delay<R: Rng + ?Sized>(model: &DelayModel, rng: &mut R) -> f64 {
    model.sample_with_jitter(rng).0
}

/// A node's correction estimates `(a_hat, b_hat, c_hat)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionState {
    pub a_hat: f64,
    pub b_hat: f64,
    pub c_hat: f64,
}

impl Default for CorrectionState {
    fn default() -> Self {
        Self {
            a_hat: 1.0,
            b_hat: 0.0,
            c_hat: 0.0,
        }
    }
}

impl CorrectionState {
    pub fn corrected_time(&self, raw_local: f64) -> f64 {
        corrected_time(self, raw_local)
    }

    /// `g = a_hat * alpha`. Needs the true drift, so analysis-only.
    pub fn corrected_drift(&self, clock: &ClockParams) -> f64 {
        self.a_hat * clock.alpha
    }

    /// `f = a_hat * beta + b_hat`. Needs the true offset, so analysis-only.
    pub fn corrected_offset(&self, clock: &ClockParams) -> f64 {
        self.a_hat * clock.beta + self.b_hat
    }

    pub fn is_finite(&self) -> bool {
        self.a_hat.is_finite() && self.b_hat.is_finite() && self.c_hat.is_finite()
    }
}

/// `a_hat * raw_local + b_hat`.
pub fn corrected_time(state: &CorrectionState, raw_local: f64) -> f64 {
    state.a_hat * raw_local + state.b_hat
}
