use super::{Ablation, LinkHistory, Sample, SyncConfig};
use crate::clock::CorrectionState;
use crate::engine::Message;
use crate::topology::Network;

/// Link weight and step size applied by one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain {
    pub gamma: f64,
    pub epsilon: f64,
}

/// Drift step for one delivery. `past` is the stored sample at index `m`,
/// `reading` the receiver's raw reading at this delivery.
pub fn drift_update(
    state: &CorrectionState,
    msg: &Message,
    past: Sample,
    reading: f64,
    gain: Gain,
) -> f64 {
    let sender_inc = msg.a_hat * (msg.tau_sent - past.sender);
    let receiver_inc = state.a_hat * (reading - past.receiver);
    state.a_hat + gain.epsilon * gain.gamma * (sender_inc - receiver_inc)
}

/// Offset step for one delivery, returning the new `(b_hat, c_hat)`.
///
/// `a_i` is the receiver's drift estimate used both in its corrected time
/// and in the `T_i` term. `self_weight` is 1 for the plain variant and
/// `sigma_i` for the consensus variant.
#[allow(clippy::too_many_arguments)]
pub fn offset_update(
    state: &CorrectionState,
    a_i: f64,
    msg: &Message,
    initial: Sample,
    reading: f64,
    self_weight: f64,
    ablation: Ablation,
    gain: Gain,
) -> (f64, f64) {
    let (t_j, t_i) = if ablation.zero_time_terms {
        (0.0, 0.0)
    } else {
        (msg.tau_sent - initial.sender, reading - initial.receiver)
    };
    let tau_hat_j = msg.a_hat * msg.tau_sent + msg.b_hat;
    let tau_hat_i = a_i * reading + state.b_hat;
    let c_eff = if ablation.freeze_compensation {
        0.0
    } else {
        self_weight * state.c_hat + (1.0 - self_weight) * msg.c_hat
    };
    let phi = (tau_hat_j - msg.a_hat * t_j) - (tau_hat_i - a_i * t_i) + c_eff;
    let step = gain.epsilon * gain.gamma * phi;
    let c_new = if ablation.freeze_compensation {
        0.0
    } else {
        c_eff - step
    };
    (state.b_hat + step, c_new)
}

/// What a delivery did to the receiver's estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateKind {
    /// First message on the link: only the initial pair was stored.
    Initial,
    /// The link has zero weight (reference node); nothing changed.
    Ignored,
    /// Offset step only; the drift variant had no usable past sample yet.
    OffsetOnly,
    /// Drift and offset steps.
    Full,
}

impl UpdateKind {
    pub fn code(self) -> u8 {
        match self {
            UpdateKind::Initial => 0,
            UpdateKind::Ignored => 1,
            UpdateKind::OffsetOnly => 2,
            UpdateKind::Full => 3,
        }
    }
}

/// Estimates, update counters and link histories of every node.
#[derive(Debug, Clone)]
pub struct SyncState {
    pub estimates: Vec<CorrectionState>,
    /// Deliveries processed per node, `nu_i`.
    pub nu: Vec<u64>,
    links: Vec<LinkHistory>,
}

impl SyncState {
    pub fn new(net: &Network) -> Self {
        Self {
            estimates: vec![CorrectionState::default(); net.n()],
            nu: vec![0; net.n()],
            links: vec![LinkHistory::new(); net.arcs().len()],
        }
    }

    /// History of the link with arc index `arc`.
    pub fn link(&self, arc: usize) -> &LinkHistory {
        &self.links[arc]
    }

    /// Handles one delivery on arc `arc` (sender `msg.sender`, receiver
    /// `receiver`, weight `gamma`), given the receiver's single raw reading.
    ///
    /// Every delivery counts towards `nu_i`, so `sum nu_i` equals the number
    /// of processed deliveries.
    pub fn process_message(
        &mut self,
        cfg: &SyncConfig,
        arc: usize,
        receiver: usize,
        gamma: f64,
        msg: &Message,
        reading: f64,
    ) -> UpdateKind {
        self.nu[receiver] += 1;
        if gamma == 0.0 {
            return UpdateKind::Ignored;
        }
        let nu = self.nu[receiver];
        let hist = &mut self.links[arc];
        let sample = Sample {
            sender: msg.tau_sent,
            receiver: reading,
        };
        let l = hist.count();
        let Some(initial) = hist.initial() else {
            hist.record(sample, &cfg.drift);
            return UpdateKind::Initial;
        };

        let state = self.estimates[receiver];
        let past = cfg
            .drift
            .past_index(l, cfg.drift_warmup)
            .and_then(|m| hist.sample(m));
        let a_new = past.map(|past| {
            let gain = Gain {
                gamma,
                epsilon: cfg.schedule.drift_step(nu, &cfg.drift),
            };
            drift_update(&state, msg, past, reading, gain)
        });
        let a_offset = match a_new {
            Some(a) if cfg.offset_uses_updated_drift => a,
            _ => state.a_hat,
        };
        let gain = Gain {
            gamma,
            epsilon: cfg.schedule.offset_step(nu),
        };
        let (b_new, c_new) = offset_update(
            &state,
            a_offset,
            msg,
            initial,
            reading,
            cfg.offset.self_weight(receiver),
            cfg.ablation,
            gain,
        );
        self.estimates[receiver] = CorrectionState {
            a_hat: a_new.unwrap_or(state.a_hat),
            b_hat: b_new,
            c_hat: c_new,
        };
        hist.record(sample, &cfg.drift);
        if a_new.is_some() {
            UpdateKind::Full
        } else {
            UpdateKind::OffsetOnly
        }
    }
}
