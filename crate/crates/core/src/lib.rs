//! Broadcast-gossip clock synchronization over lossy directed networks.
//!
//! Every node owns an affine clock `tau_i(t) = alpha_i t + beta_i + xi_i(t)` and
//! corrects it to `a_i tau_i + b_i`. Nodes broadcast their raw reading and
//! current estimates on Poisson ticks; receivers update the drift correction
//! `a_i` from local-time increments and the offset correction `b_i` together
//! with a delay compensation parameter `c_i`.
//!
//! The crate is split the same way the problem is:
//!
//! * [`clock`]: ground-truth clock, delay and noise primitives.
//! * [`topology`]: directed networks, connectivity repair and the expected
//!   weighted Laplacian.
//! * [`engine`]: deterministic discrete-event simulator producing a [`Trace`].
//! * [`sync`]: the per-node drift and offset update rules.
//! * [`analysis`]: spectral, Lyapunov and rate diagnostics plus trace metrics.
//! * [`experiment`]: experiment configuration, presets and seed sweeps.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod clock;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod rng;
pub mod sync;
pub mod topology;

pub use clock::{ClockParams, CorrectionState, DelayModel, NoiseDist};
pub use engine::{run, RunConfig, StopCondition, Trace};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, Preset};
pub use sync::{DriftVariant, OffsetVariant, StepSchedule, SyncConfig};
pub use topology::{Arc, GeometricConfig, Network, Node, ProbabilityProfile};
