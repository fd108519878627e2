//! The synchronization algorithms: per-link histories, step sizes and the
//! drift/offset update rules executed by a receiving node.
//!
//! Drift correction compares the sender's corrected local-time increment
//! with the receiver's over the same pair of receptions `(m, l)`; the three
//! variants differ only in how the past index `m` is chosen. Offset
//! correction compares corrected times with the linear `T` terms removed and
//! a compensation parameter `c` that absorbs the mean delay.

mod history;
mod update;

pub use history::{LinkHistory, Sample};
pub use update::{drift_update, offset_update, Gain, SyncState, UpdateKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::Network;

/// How the past reception index `m` is chosen for the drift increment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftVariant {
    /// `m = l - lag`: fixed-length increments, bounded memory.
    #[serde(alias = "a")]
    FixedLag { lag: u64 },
    /// `m = floor(fraction * l)`: both ends of the interval move.
    #[serde(alias = "b")]
    Proportional { fraction: f64 },
    /// `m = anchor`: increments measured from a fixed reception.
    #[serde(alias = "c")]
    Anchored {
        #[serde(default)]
        anchor: u64,
    },
}

impl Default for DriftVariant {
    fn default() -> Self {
        DriftVariant::FixedLag { lag: 100 }
    }
}

impl DriftVariant {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DriftVariant::FixedLag { lag: 0 } => {
                Err(Error::InvalidParameter("drift lag must be >= 1".into()))
            }
            DriftVariant::Proportional { fraction } if !(fraction > 0.0 && fraction < 1.0) => {
                Err(Error::InvalidParameter(format!(
                    "drift fraction must be in (0, 1), got {fraction}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Past index used at reception `l >= 1`, or `None` if the history is
    /// not long enough yet.
    pub fn past_index(&self, l: u64, warmup: bool) -> Option<u64> {
        match *self {
            DriftVariant::FixedLag { lag } => {
                if l >= lag {
                    Some(l - lag)
                } else if warmup && l >= 1 {
                    Some(0)
                } else {
                    None
                }
            }
            DriftVariant::Proportional { fraction } => Some((fraction * l as f64).floor() as u64),
            DriftVariant::Anchored { anchor } => (l > anchor).then_some(anchor),
        }
    }

    /// Whether the drift step decays as `nu^-(1 + zeta')` instead of `nu^-zeta'`.
    pub fn has_growing_increments(&self) -> bool {
        !matches!(self, DriftVariant::FixedLag { .. })
    }

    pub fn label(&self) -> String {
        match *self {
            DriftVariant::FixedLag { lag } => format!("fixed_lag(L={lag})"),
            DriftVariant::Proportional { fraction } => format!("proportional(nu={fraction})"),
            DriftVariant::Anchored { anchor } => format!("anchored(l0={anchor})"),
        }
    }
}

/// Per-node consensus weight on the compensation parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sigma {
    Uniform(f64),
    PerNode(Vec<f64>),
}

impl Sigma {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Sigma::Uniform(s) => *s,
            Sigma::PerNode(v) => v[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum OffsetVariant {
    /// Each node keeps its own compensation parameter.
    #[default]
    #[serde(alias = "a")]
    Plain,
    /// The compensation parameter is mixed with the sender's before each
    /// step: `sigma c_i + (1 - sigma) c_j`.
    #[serde(alias = "b")]
    Consensus { sigma: Sigma },
}

impl OffsetVariant {
    pub fn validate(&self, n: usize) -> Result<()> {
        if let OffsetVariant::Consensus { sigma } = self {
            let check = |s: f64| {
                if s > 0.0 && s <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("sigma must be in (0, 1], got {s}")))
                }
            };
            match sigma {
                Sigma::Uniform(s) => check(*s)?,
                Sigma::PerNode(v) => {
                    if v.len() != n {
                        return Err(Error::InvalidParameter(format!(
                            "expected {n} per-node sigma values, got {}",
                            v.len()
                        )));
                    }
                    v.iter().try_for_each(|&s| check(s))?;
                }
            }
        }
        Ok(())
    }

    /// Weight on the receiver's own compensation parameter.
    pub fn self_weight(&self, i: usize) -> f64 {
        match self {
            OffsetVariant::Plain => 1.0,
            OffsetVariant::Consensus { sigma } => sigma.at(i),
        }
    }
}

/// Step-size exponents; the local update counter `nu` drives the decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepSchedule {
    /// Drift exponent `zeta'` in (1/2, 1].
    pub zeta_drift: f64,
    /// Offset exponent `zeta''` in (1/2, 1].
    pub zeta_offset: f64,
    /// Constant step for the noiseless special case. The growing-increment
    /// drift variants then use `constant / nu`.
    pub constant_step: Option<f64>,
    /// Overrides `constant_step` for the drift update only.
    pub constant_drift_step: Option<f64>,
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self {
            zeta_drift: 0.99,
            zeta_offset: 0.99,
            constant_step: None,
            constant_drift_step: None,
        }
    }
}

/// `nu^-zeta`.
pub fn step_size(nu: u64, zeta: f64) -> f64 {
    debug_assert!(nu >= 1);
    (nu as f64).powf(-zeta)
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        for (name, z) in [("zeta_drift", self.zeta_drift), ("zeta_offset", self.zeta_offset)] {
            if !(z > 0.5 && z <= 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must be in (1/2, 1], got {z}")));
            }
        }
        for (name, step) in [("constant_step", self.constant_step), ("constant_drift_step", self.constant_drift_step)] {
            if let Some(eps) = step {
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(Error::InvalidParameter(format!("{name} must be > 0")));
                }
            }
        }
        if self.constant_drift_step.is_some() && self.constant_step.is_none() {
            return Err(Error::InvalidParameter("constant_drift_step requires constant_step".into()));
        }
        Ok(())
    }

    /// Exponent applied to the drift step for `variant`.
    pub fn drift_exponent(&self, variant: &DriftVariant) -> f64 {
        if variant.has_growing_increments() {
            1.0 + self.zeta_drift
        } else {
            self.zeta_drift
        }
    }

    pub fn drift_step(&self, nu: u64, variant: &DriftVariant) -> f64 {
        match self.constant_drift_step.or(self.constant_step) {
            Some(eps) if variant.has_growing_increments() => eps / nu as f64,
            Some(eps) => eps,
            None => step_size(nu, self.drift_exponent(variant)),
        }
    }

    pub fn offset_step(&self, nu: u64) -> f64 {
        self.constant_step.unwrap_or_else(|| step_size(nu, self.zeta_offset))
    }
}

/// Switches that remove parts of the offset error function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ablation {
    /// Drop the `T_j`, `T_i` terms that cancel the growing local times.
    pub zero_time_terms: bool,
    /// Hold the compensation parameter at zero.
    pub freeze_compensation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SyncConfig {
    pub drift: DriftVariant,
    pub offset: OffsetVariant,
    pub schedule: StepSchedule,
    pub ablation: Ablation,
    /// Let the offset step see the drift estimate already updated by the
    /// same delivery instead of the pre-update value.
    pub offset_uses_updated_drift: bool,
    /// Before `l >= lag`, use the longest available window instead of
    /// skipping the drift step.
    pub drift_warmup: bool,
}

impl SyncConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        self.drift.validate()?;
        self.offset.validate(n)?;
        self.schedule.validate()
    }
}

/// Turns `reference` into a flooding root: every arc into it gets weight
/// zero, so its estimates never change.
pub fn make_reference(net: &Network, reference: usize) -> Result<Network> {
    if !net.is_center(reference) {
        return Err(Error::NotCenter(reference));
    }
    net.map_arcs(|arc| {
        if arc.to == reference {
            arc.gamma = 0.0;
        }
    })
}
