//! Deterministic discrete-event simulator.
//!
//! The merged Poisson tick process picks a broadcaster; every out-neighbor
//! independently hears the broadcast and gets a delivery event after a
//! random delay. Deliveries are processed one at a time in `(time, seq)`
//! order and each one is a global iteration `k`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::clock::CorrectionState;
use crate::error::{Error, Result};
use crate::rng::{per_node, stream, StreamKind, StreamRng};
use crate::sync::{SyncConfig, SyncState, UpdateKind};
use crate::topology::Network;

/// Broadcast payload: raw reading plus the sender's current estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message {
    pub sender: usize,
    pub tau_sent: f64,
    pub a_hat: f64,
    pub b_hat: f64,
    pub c_hat: f64,
    /// Reception index `l` on the link, assigned at delivery.
    pub link_seq: u64,
}

#[derive(Debug, Clone, Copy)]
pub enum EventKind {
    Tick,
    Delivery(Delivery),
}

/// A message in flight together with the ground-truth quantities the
/// analysis layer needs about it.
#[derive(Debug, Clone, Copy)]
pub struct Delivery {
    pub arc: usize,
    pub msg: Message,
    pub t_sent: f64,
    pub xi_sender: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed so that `BinaryHeap` pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Min-queue over `(time, seq)`; ties keep insertion order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
}

impl EventQueue {
    pub fn push(&mut self, time: f64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time, seq, kind });
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// Merged Poisson tick process of all nodes.
pub struct TickScheduler {
    gap: Exp<f64>,
    cumulative: Vec<f64>,
    rng: StreamRng,
}

impl TickScheduler {
    pub fn new(net: &Network, seed: u64) -> Self {
        let total = net.total_rate();
        let mut acc = 0.0;
        let cumulative = net
            .nodes()
            .iter()
            .map(|node| {
                acc += node.rate / total;
                acc
            })
            .collect();
        Self {
            gap: Exp::new(total).expect("validated positive rates"),
            cumulative,
            rng: stream(seed, StreamKind::Ticks, 0),
        }
    }

    /// Time to the next tick of any node.
    pub fn next_gap(&mut self) -> f64 {
        self.gap.sample(&mut self.rng)
    }

    /// Broadcaster of a tick, chosen with probability `mu_j / mu_c`.
    pub fn pick_broadcaster(&mut self) -> usize {
        let u: f64 = self.rng.random();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCondition {
    /// Stop after this many processed deliveries.
    Updates(u64),
    /// Stop at this absolute time, in seconds.
    Horizon(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sync: SyncConfig,
    pub stop: StopCondition,
    /// Keep a full snapshot every `stride` updates (plus the first and last).
    pub stride: u64,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(sync: SyncConfig, stop: StopCondition, seed: u64) -> Self {
        Self {
            sync,
            stop,
            stride: 1,
            seed,
        }
    }
}

/// One processed delivery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRecord {
    pub k: u64,
    pub t_abs: f64,
    pub t_sent: f64,
    pub receiver: usize,
    pub sender: usize,
    pub arc: usize,
    pub link_seq: u64,
    pub kind: UpdateKind,
}

/// All estimates and update counters after iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub k: u64,
    pub t_abs: f64,
    pub estimates: Vec<CorrectionState>,
    pub nu: Vec<u64>,
}

/// Ground truth of the first reception on a link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialSample {
    pub t_sent: f64,
    pub t_recv: f64,
    pub xi_sender: f64,
    pub xi_receiver: f64,
    pub eta: f64,
    pub delay: f64,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub n: usize,
    pub records: Vec<UpdateRecord>,
    pub snapshots: Vec<Snapshot>,
    /// Per arc index, the first reception if any.
    pub initial_samples: Vec<Option<InitialSample>>,
    pub final_state: Vec<CorrectionState>,
    pub final_nu: Vec<u64>,
    /// Nodes that never received a message; their estimates stay initial.
    pub silent_nodes: Vec<usize>,
    pub ticks: u64,
    pub end_time: f64,
}

impl Trace {
    pub fn updates(&self) -> u64 {
        self.records.len() as u64
    }

    /// Writes the snapshots as CSV: `k,t_abs,i,j` followed by
    /// `a_<n>,b_<n>,c_<n>` for each node. The `k = 0` row has empty `i,j`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["k".to_string(), "t_abs".into(), "i".into(), "j".into()];
        for node in 0..self.n {
            for p in ["a", "b", "c"] {
                header.push(format!("{p}_{node}"));
            }
        }
        w.write_record(&header)?;
        for snap in &self.snapshots {
            let mut row = vec![snap.k.to_string(), snap.t_abs.to_string()];
            match snap.k.checked_sub(1).map(|idx| &self.records[idx as usize]) {
                Some(r) => {
                    row.push(r.receiver.to_string());
                    row.push(r.sender.to_string());
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
            for e in &snap.estimates {
                row.push(e.a_hat.to_string());
                row.push(e.b_hat.to_string());
                row.push(e.c_hat.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Read-only view handed to observers after every update.
pub struct StepView<'a> {
    pub record: &'a UpdateRecord,
    pub state: &'a SyncState,
}

/// Runs the simulation, recording snapshots every `cfg.stride` updates.
pub fn run(net: &Network, cfg: &RunConfig) -> Result<Trace> {
    run_with_observer(net, cfg, |_| {})
}

/// Like [`run`], calling `observe` after every processed delivery.
pub fn run_with_observer(
    net: &Network,
    cfg: &RunConfig,
    mut observe: impl FnMut(&StepView<'_>),
) -> Result<Trace> {
    cfg.sync.validate(net.n())?;
    match cfg.stop {
        StopCondition::Horizon(h) if !(h > 0.0) => {
            return Err(Error::InvalidParameter("horizon must be > 0".into()))
        }
        _ => {}
    }
    if cfg.stride == 0 {
        return Err(Error::InvalidParameter("stride must be >= 1".into()));
    }
    if net.arcs().is_empty() && matches!(cfg.stop, StopCondition::Updates(u) if u > 0) {
        return Err(Error::InvalidParameter("network has no arcs; no update can ever happen".into()));
    }

    let n = net.n();
    let mut ticks = TickScheduler::new(net, cfg.seed);
    let mut hearing = per_node(cfg.seed, StreamKind::Hearing, n);
    let mut jitter = per_node(cfg.seed, StreamKind::Jitter, n);
    let mut reading = per_node(cfg.seed, StreamKind::Reading, n);

    let mut state = SyncState::new(net);
    let mut queue = EventQueue::default();
    let mut records = Vec::new();
    let mut snapshots = vec![Snapshot {
        k: 0,
        t_abs: 0.0,
        estimates: state.estimates.clone(),
        nu: state.nu.clone(),
    }];
    let mut initial_samples = vec![None; net.arcs().len()];
    let mut tick_count = 0u64;
    let mut now = 0.0;

    let max_updates = match cfg.stop {
        StopCondition::Updates(u) => u,
        StopCondition::Horizon(_) => u64::MAX,
    };
    let horizon = match cfg.stop {
        StopCondition::Horizon(h) => h,
        StopCondition::Updates(_) => f64::INFINITY,
    };

    queue.push(ticks.next_gap(), EventKind::Tick);
    while (records.len() as u64) < max_updates {
        let event = queue.pop().expect("a tick is always pending");
        if event.time > horizon {
            break;
        }
        now = event.time;
        match event.kind {
            EventKind::Tick => {
                tick_count += 1;
                let j = ticks.pick_broadcaster();
                let clock = net.node(j).clock;
                let (tau, xi) = clock.read_with_noise(now, &mut reading[j]);
                let e = state.estimates[j];
                for &a in net.out_arcs(j) {
                    let arc = net.arc(a);
                    let heard = hearing[j].random::<f64>() < arc.p_hear;
                    if !heard {
                        continue;
                    }
                    let (delay, eta) = arc.delay.sample_with_jitter(&mut jitter[arc.to]);
                    let msg = Message {
                        sender: j,
                        tau_sent: tau,
                        a_hat: e.a_hat,
                        b_hat: e.b_hat,
                        c_hat: e.c_hat,
                        link_seq: 0,
                    };
                    queue.push(
                        now + delay,
                        EventKind::Delivery(Delivery {
                            arc: a,
                            msg,
                            t_sent: now,
                            xi_sender: xi,
                            eta,
                        }),
                    );
                }
                queue.push(now + ticks.next_gap(), EventKind::Tick);
            }
            EventKind::Delivery(mut d) => {
                let arc = net.arc(d.arc);
                let i = arc.to;
                let (tau_i, xi_i) = net.node(i).clock.read_with_noise(now, &mut reading[i]);
                d.msg.link_seq = state.link(d.arc).count();
                if initial_samples[d.arc].is_none() {
                    initial_samples[d.arc] = Some(InitialSample {
                        t_sent: d.t_sent,
                        t_recv: now,
                        xi_sender: d.xi_sender,
                        xi_receiver: xi_i,
                        eta: d.eta,
                        delay: now - d.t_sent,
                    });
                }
                let kind = state.process_message(&cfg.sync, d.arc, i, arc.gamma, &d.msg, tau_i);
                let k = records.len() as u64 + 1;
                let record = UpdateRecord {
                    k,
                    t_abs: now,
                    t_sent: d.t_sent,
                    receiver: i,
                    sender: d.msg.sender,
                    arc: d.arc,
                    link_seq: d.msg.link_seq,
                    kind,
                };
                observe(&StepView {
                    record: &record,
                    state: &state,
                });
                records.push(record);
                if k.is_multiple_of(cfg.stride) {
                    snapshots.push(Snapshot {
                        k,
                        t_abs: now,
                        estimates: state.estimates.clone(),
                        nu: state.nu.clone(),
                    });
                }
            }
        }
    }

    let k = records.len() as u64;
    if snapshots.last().map(|s| s.k) != Some(k) {
        snapshots.push(Snapshot {
            k,
            t_abs: now,
            estimates: state.estimates.clone(),
            nu: state.nu.clone(),
        });
    }
    let silent_nodes = (0..n).filter(|&i| state.nu[i] == 0).collect();
    Ok(Trace {
        n,
        records,
        snapshots,
        initial_samples,
        final_state: state.estimates.clone(),
        final_nu: state.nu.clone(),
        silent_nodes,
        ticks: tick_count,
        end_time: now,
    })
}
