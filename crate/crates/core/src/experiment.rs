//! Experiment configuration files, presets and per-seed runs.
//!
//! A config is a TOML document with a `schema_version` field; unknown keys
//! are rejected. Defaults reproduce the reference ten-node setup.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{run, RunConfig, StopCondition, Trace};
use crate::error::{Error, Result};
use crate::sync::{
    make_reference, Ablation, DriftVariant, OffsetVariant, Sigma, StepSchedule, SyncConfig,
};
use crate::topology::{generate_geometric, has_spanning_tree, GeometricConfig, Network};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_UPDATES: u64 = 100_000;
pub const DEFAULT_STRIDE: u64 = 100;
pub const DEFAULT_SEEDS: u64 = 10;

/// Where the network comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum NetworkSpec {
    /// A fresh geometric network per seed.
    Geometric(GeometricConfig),
    /// A network file, shared by every seed.
    File { path: PathBuf },
}

impl Default for NetworkSpec {
    fn default() -> Self {
        NetworkSpec::Geometric(GeometricConfig::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKeyword {
    /// The lowest-numbered center of the network.
    FirstCenter,
}

/// Reference node for flooding mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReferenceSpec {
    Node(usize),
    Keyword(ReferenceKeyword),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub network: NetworkSpec,
    #[serde(default)]
    pub sync: SyncConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceSpec>,
    /// Number of processed deliveries, unless `horizon` is set.
    #[serde(default = "default_updates")]
    pub updates: u64,
    /// Absolute-time horizon in seconds; overrides `updates`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "default_stride")]
    pub stride: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Fixed seed for network generation; by default each run seed also
    /// generates its own network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_seed: Option<u64>,
}

fn default_updates() -> u64 {
    DEFAULT_UPDATES
}

fn default_stride() -> u64 {
    DEFAULT_STRIDE
}

fn default_seeds() -> Vec<u64> {
    (0..DEFAULT_SEEDS).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            name: "default".into(),
            network: NetworkSpec::default(),
            sync: SyncConfig::default(),
            reference: None,
            updates: DEFAULT_UPDATES,
            horizon: None,
            stride: DEFAULT_STRIDE,
            seeds: default_seeds(),
            network_seed: None,
        }
    }
}

/// Output of one seed.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub network: Network,
    pub trace: Trace,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {}, expected {CONFIG_SCHEMA_VERSION}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Loads a config; a relative network file path is resolved against the
    /// config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        if let NetworkSpec::File { path: net_path } = &mut cfg.network {
            if net_path.is_relative() {
                if let Some(dir) = path.parent() {
                    *net_path = dir.join(&*net_path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Node count, if known without loading a file.
    fn declared_nodes(&self) -> Option<usize> {
        match &self.network {
            NetworkSpec::Geometric(g) => Some(g.n),
            NetworkSpec::File { .. } => None,
        }
    }

    /// Checks parameter ranges. Network-dependent checks (spanning tree,
    /// reference center) happen when the network is built.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema_version {}", self.schema_version)));
        }
        if let NetworkSpec::Geometric(g) = &self.network {
            g.validate()?;
        }
        // Per-node sigma lengths are checked against the built network.
        match self.declared_nodes() {
            Some(n) => self.sync.validate(n)?,
            None => {
                self.sync.drift.validate()?;
                self.sync.schedule.validate()?;
            }
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter("horizon must be > 0".into()));
            }
        }
        Ok(())
    }

    pub fn stop(&self) -> StopCondition {
        match self.horizon {
            Some(h) => StopCondition::Horizon(h),
            None => StopCondition::Updates(self.updates),
        }
    }

    /// The network used by `seed`, with the reference node applied.
    pub fn build_network(&self, seed: u64) -> Result<Network> {
        let net = match &self.network {
            NetworkSpec::Geometric(g) => generate_geometric(g, self.network_seed.unwrap_or(seed))?,
            NetworkSpec::File { path } => Network::load(path)?,
        };
        if !has_spanning_tree(&net) {
            return Err(Error::NoSpanningTree(
                "no node reaches every other node along the arcs".into(),
            ));
        }
        self.sync.validate(net.n())?;
        match self.reference {
            None => Ok(net),
            Some(ReferenceSpec::Node(r)) => {
                if r >= net.n() {
                    return Err(Error::InvalidParameter(format!("reference node {r} out of range")));
                }
                make_reference(&net, r)
            }
            Some(ReferenceSpec::Keyword(ReferenceKeyword::FirstCenter)) => {
                make_reference(&net, net.centers()[0])
            }
        }
    }

    /// Resolved reference node of `net`, if any.
    pub fn reference_node(&self, net: &Network) -> Option<usize> {
        match self.reference? {
            ReferenceSpec::Node(r) => Some(r),
            ReferenceSpec::Keyword(ReferenceKeyword::FirstCenter) => {
                // The reference has all incoming weights at zero.
                (0..net.n()).find(|&i| net.in_arcs(i).iter().all(|&a| net.arc(a).gamma == 0.0))
            }
        }
    }

    pub fn run_config(&self, seed: u64) -> RunConfig {
        RunConfig {
            sync: self.sync.clone(),
            stop: self.stop(),
            stride: self.stride,
            seed,
        }
    }

    pub fn run_seed(&self, seed: u64) -> Result<SeedRun> {
        let network = self.build_network(seed)?;
        let trace = run(&network, &self.run_config(seed))?;
        Ok(SeedRun { seed, network, trace })
    }

    /// Same experiment on `n` nodes. A generated network keeps its expected
    /// neighborhood size by shrinking the radius with `sqrt(n0 / n)`.
    pub fn with_nodes(&self, n: usize) -> Result<Self> {
        let mut cfg = self.clone();
        match &mut cfg.network {
            NetworkSpec::Geometric(g) => {
                g.radius *= (g.n as f64 / n as f64).sqrt();
                g.n = n;
            }
            NetworkSpec::File { .. } => {
                return Err(Error::Config("cannot rescale a network loaded from a file".into()))
            }
        }
        cfg.name = format!("{}_n{n}", self.name);
        Ok(cfg)
    }

    pub fn geometric_mut(&mut self) -> Option<&mut GeometricConfig> {
        match &mut self.network {
            NetworkSpec::Geometric(g) => Some(g),
            NetworkSpec::File { .. } => None,
        }
    }
}

/// Link weight used by the presets whose increments grow without bound.
/// Their steps decay like `nu^-(1+zeta')`, and with unit weights the drifts
/// are still far from consensus after the default number of updates.
pub const LONG_INCREMENT_GAMMA: f64 = 20.0;

/// Built-in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Fixed-lag drift correction, `L = 1`.
    Fig1a,
    /// Fixed-lag drift correction, `L = 100`.
    Fig1b,
    /// Proportional drift correction, `nu = 1/2`.
    Fig1c,
    /// Anchored drift correction, `l0 = 0`.
    Fig1d,
    /// Plain offset correction.
    Fig2a,
    /// Offset correction with compensation consensus.
    Fig2b,
    /// Offset correction without the `T` terms.
    Fig2c,
    /// Offset correction with the compensation parameter frozen at zero.
    Fig2d,
    /// Mean square disagreement, for scaling over network sizes.
    Fig3,
    /// Proportional drift correction for the scaled disagreement.
    Fig4,
    /// Noiseless, constant delay, plain offset correction.
    FixedPoint,
    /// Noiseless, negligible delay, constant steps, compensation consensus.
    SpecialCase,
    /// Reference node at the first center.
    Flooding,
}

impl Preset {
    pub const ALL: [Preset; 13] = [
        Preset::Fig1a,
        Preset::Fig1b,
        Preset::Fig1c,
        Preset::Fig1d,
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig2c,
        Preset::Fig2d,
        Preset::Fig3,
        Preset::Fig4,
        Preset::FixedPoint,
        Preset::SpecialCase,
        Preset::Flooding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1a => "fig1a",
            Preset::Fig1b => "fig1b",
            Preset::Fig1c => "fig1c",
            Preset::Fig1d => "fig1d",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
            Preset::Fig2d => "fig2d",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::FixedPoint => "fixed_point",
            Preset::SpecialCase => "special_case",
            Preset::Flooding => "flooding",
        }
    }

    pub fn config(self) -> ExperimentConfig {
        let lag100 = DriftVariant::FixedLag { lag: 100 };
        let consensus = OffsetVariant::Consensus {
            sigma: Sigma::Uniform(0.5),
        };
        let mut cfg = ExperimentConfig {
            name: self.name().into(),
            ..ExperimentConfig::default()
        };
        let sync = &mut cfg.sync;
        match self {
            Preset::Fig1a => sync.drift = DriftVariant::FixedLag { lag: 1 },
            Preset::Fig1b | Preset::Fig2a | Preset::Fig3 => sync.drift = lag100,
            Preset::Fig1c | Preset::Fig4 => {
                sync.drift = DriftVariant::Proportional { fraction: 0.5 };
                cfg.geometric_mut().expect("generated").gamma = LONG_INCREMENT_GAMMA;
            }
            Preset::Fig1d => {
                sync.drift = DriftVariant::Anchored { anchor: 0 };
                cfg.geometric_mut().expect("generated").gamma = LONG_INCREMENT_GAMMA;
            }
            Preset::Fig2b => {
                sync.drift = lag100;
                sync.offset = consensus;
            }
            Preset::Fig2c => {
                sync.drift = lag100;
                sync.ablation = Ablation {
                    zero_time_terms: true,
                    ..Ablation::default()
                };
            }
            Preset::Fig2d => {
                sync.drift = lag100;
                sync.ablation = Ablation {
                    freeze_compensation: true,
                    ..Ablation::default()
                };
            }
            Preset::FixedPoint => {
                sync.drift = lag100;
                let g = cfg.geometric_mut().expect("generated");
                g.xi_sigma = 0.0;
                g.eta_sigma = 0.0;
            }
            Preset::SpecialCase => {
                sync.drift = DriftVariant::FixedLag { lag: 1 };
                sync.offset = OffsetVariant::Consensus {
                    sigma: Sigma::Uniform(0.1),
                };
                sync.schedule = StepSchedule {
                    constant_step: Some(0.5),
                    constant_drift_step: Some(0.2),
                    ..StepSchedule::default()
                };
                cfg.updates = 10_000;
                cfg.stride = 10;
                let g = cfg.geometric_mut().expect("generated");
                g.xi_sigma = 0.0;
                g.eta_sigma = 0.0;
                g.delta_bar = crate::clock::DEFAULT_DELTA_MIN;
            }
            Preset::Flooding => {
                sync.drift = lag100;
                cfg.reference = Some(ReferenceSpec::Keyword(ReferenceKeyword::FirstCenter));
            }
        }
        cfg
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset {s:?}")))
    }
}
