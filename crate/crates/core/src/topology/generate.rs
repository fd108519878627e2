//! Geometric random graphs with one-way arcs, and spanning-tree repair.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Arc, Network, Node};
use crate::clock::{ClockParams, DelayModel};
use crate::error::{Error, Result};
use crate::rng::{stream, StreamKind};

/// Parameters of a generated network. Defaults follow the reference
/// experiment: drifts in (0.96, 1.04), offsets in (-0.2, 0.2), 0.1 s mean
/// delay, hearing probability 0.9, noise std-dev 0.05 s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometricConfig {
    pub n: usize,
    /// Connection radius in units of the square's side.
    pub radius: f64,
    /// Fraction of undirected edges turned into one-way arcs.
    pub one_way_fraction: f64,
    pub rate: f64,
    pub gamma: f64,
    pub p_hear: f64,
    pub delta_bar: f64,
    pub eta_sigma: f64,
    pub xi_sigma: f64,
    pub alpha_range: (f64, f64),
    pub beta_range: (f64, f64),
}

impl Default for GeometricConfig {
    fn default() -> Self {
        Self {
            n: 10,
            radius: 0.5,
            one_way_fraction: 0.1,
            rate: 1.0,
            gamma: 1.0,
            p_hear: 0.9,
            delta_bar: 0.1,
            eta_sigma: 0.05,
            xi_sigma: 0.05,
            alpha_range: (0.96, 1.04),
            beta_range: (-0.2, 0.2),
        }
    }
}

impl GeometricConfig {
    pub fn new(n: usize, radius: f64, one_way_fraction: f64) -> Self {
        Self {
            n,
            radius,
            one_way_fraction,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 nodes, got {}", self.n)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::InvalidParameter("radius must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.one_way_fraction) {
            return Err(Error::InvalidParameter("one_way_fraction must be in [0, 1]".into()));
        }
        let (a0, a1) = self.alpha_range;
        if !(a0 <= a1 && (a0 > 0.0 || a1 < 0.0)) {
            return Err(Error::InvalidParameter(
                "alpha_range must be ordered and exclude zero".into(),
            ));
        }
        if self.beta_range.0 > self.beta_range.1 {
            return Err(Error::InvalidParameter("beta_range must be ordered".into()));
        }
        Ok(())
    }

    fn delay(&self) -> Result<DelayModel> {
        DelayModel::new(self.delta_bar, self.eta_sigma)
    }

    fn arc(&self, from: usize, to: usize) -> Result<Arc> {
        Ok(Arc {
            from,
            to,
            gamma: self.gamma,
            p_hear: self.p_hear,
            delay: self.delay()?,
        })
    }
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Places `n` nodes uniformly in the unit square, links pairs closer than
/// `radius`, turns about `one_way_fraction` of the links into one-way arcs
/// and then repairs the result until some node reaches every other node.
pub fn generate_geometric(cfg: &GeometricConfig, seed: u64) -> Result<Network> {
    cfg.validate()?;
    let mut topo = stream(seed, StreamKind::Topology, 0);
    let mut params = stream(seed, StreamKind::ClockParams, 0);

    let nodes = (0..cfg.n)
        .map(|_| {
            let position = [topo.random::<f64>(), topo.random::<f64>()];
            let clock = ClockParams::new(
                uniform_in(&mut params, cfg.alpha_range),
                uniform_in(&mut params, cfg.beta_range),
                cfg.xi_sigma,
            )?;
            Ok(Node {
                position: Some(position),
                rate: cfg.rate,
                clock,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut arcs = Vec::new();
    for a in 0..cfg.n {
        for b in a + 1..cfg.n {
            if distance(&nodes[a], &nodes[b]) >= cfg.radius {
                continue;
            }
            // Draw both decisions unconditionally to keep the stream aligned.
            let one_way = topo.random::<f64>() < cfg.one_way_fraction;
            let forward = topo.random::<bool>();
            if !one_way || forward {
                arcs.push(cfg.arc(a, b)?);
            }
            if !one_way || !forward {
                arcs.push(cfg.arc(b, a)?);
            }
        }
    }
    let net = Network::new(nodes, arcs)?;
    repair_connectivity(&net, cfg)
}

fn distance(a: &Node, b: &Node) -> f64 {
    match (a.position, b.position) {
        (Some(p), Some(q)) => ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt(),
        _ => 0.0,
    }
}

/// Strongly connected components by Kosaraju; returns a component id per node.
fn components(net: &Network) -> Vec<usize> {
    let n = net.n();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        // Iterative post-order DFS.
        let mut stack = vec![(s, 0usize)];
        seen[s] = true;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            let outs = net.out_arcs(v);
            if *next < outs.len() {
                let w = net.arc(outs[*next]).to;
                *next += 1;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = count;
        while let Some(v) = stack.pop() {
            for &a in net.in_arcs(v) {
                let w = net.arc(a).from;
                if comp[w] == usize::MAX {
                    comp[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    comp
}

/// Source components: strongly connected components with no incoming arc
/// from another component. A spanning tree exists iff there is exactly one.
fn source_components(net: &Network) -> (Vec<usize>, Vec<usize>) {
    let comp = components(net);
    let count = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut has_in = vec![false; count];
    for arc in net.arcs() {
        if comp[arc.from] != comp[arc.to] {
            has_in[comp[arc.to]] = true;
        }
    }
    let sources = (0..count).filter(|&c| !has_in[c]).collect();
    (comp, sources)
}

/// Adds the fewest arcs needed for a spanning tree.
///
/// While more than one source component exists, the closest pair `(u, v)`
/// with `v` in a source component `S` and `u` not reachable from `S` gets a
/// new arc `u -> v`. Each added arc removes exactly one source, so the
/// number of added arcs is `sources - 1`, which is the minimum. Networks that
/// already have a spanning tree are returned unchanged.
pub fn repair_connectivity(net: &Network, defaults: &GeometricConfig) -> Result<Network> {
    let mut net = net.clone();
    loop {
        let (comp, sources) = source_components(&net);
        if sources.len() <= 1 {
            return Ok(net);
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for &s in &sources {
            let members: Vec<usize> = (0..net.n()).filter(|&v| comp[v] == s).collect();
            let reach = net.reachable_from(members[0]);
            for &v in &members {
                for u in (0..net.n()).filter(|&u| !reach[u]) {
                    let d = distance(net.node(u), net.node(v));
                    if best.is_none_or(|(bd, _, _)| d < bd) {
                        best = Some((d, u, v));
                    }
                }
            }
        }
        let (_, u, v) = best.expect("two sources always leave a candidate pair");
        net = net.with_extra_arcs(vec![defaults.arc(u, v)?])?;
    }
}
