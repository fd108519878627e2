//! Directed broadcast networks.
//!
//! An arc `j -> i` means node `i` can hear node `j`'s broadcasts. Nodes are
//! indexed from zero.

mod generate;
mod profile;

pub use generate::{generate_geometric, repair_connectivity, GeometricConfig};
pub use profile::{expected_gamma_d, expected_laplacian, probability_profile, ProbabilityProfile};

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::clock::{ClockParams, DelayModel};
use crate::error::{Error, Result};

/// Current version of the network file layout.
pub const NETWORK_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    /// Position in the unit square, when the network is geometric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
    /// Poisson broadcast rate, ticks per second.
    pub rate: f64,
    pub clock: ClockParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    /// Weight the receiver gives to this link. Zero mutes the link.
    pub gamma: f64,
    /// Probability that the receiver hears a given broadcast.
    pub p_hear: f64,
    pub delay: DelayModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    schema_version: u32,
    #[serde(default, rename = "node")]
    nodes: Vec<Node>,
    #[serde(default, rename = "arc")]
    arcs: Vec<Arc>,
}

impl Network {
    pub fn new(nodes: Vec<Node>, arcs: Vec<Arc>) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::InvalidParameter("network has no nodes".into()));
        }
        for (idx, node) in nodes.iter().enumerate() {
            if !(node.rate > 0.0 && node.rate.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "node {idx}: broadcast rate must be > 0, got {}",
                    node.rate
                )));
            }
            node.clock
                .validate()
                .map_err(|e| Error::InvalidParameter(format!("node {idx}: {e}")))?;
        }
        let mut seen = HashSet::new();
        let mut out_arcs = vec![Vec::new(); n];
        let mut in_arcs = vec![Vec::new(); n];
        for (idx, arc) in arcs.iter().enumerate() {
            if arc.from >= n || arc.to >= n {
                return Err(Error::InvalidParameter(format!(
                    "arc {} -> {} references a missing node",
                    arc.from, arc.to
                )));
            }
            if arc.from == arc.to {
                return Err(Error::InvalidParameter(format!("self-arc on node {}", arc.from)));
            }
            if !seen.insert((arc.from, arc.to)) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate arc {} -> {}",
                    arc.from, arc.to
                )));
            }
            if !(arc.gamma >= 0.0 && arc.gamma.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "arc {} -> {}: weight must be >= 0",
                    arc.from, arc.to
                )));
            }
            if !(arc.p_hear > 0.0 && arc.p_hear <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "arc {} -> {}: hearing probability must be in (0, 1], got {}",
                    arc.from, arc.to, arc.p_hear
                )));
            }
            arc.delay.validate()?;
            out_arcs[arc.from].push(idx);
            in_arcs[arc.to].push(idx);
        }
        Ok(Self {
            nodes,
            arcs,
            out_arcs,
            in_arcs,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, idx: usize) -> &Arc {
        &self.arcs[idx]
    }

    /// Index of the arc `from -> to`, if present.
    pub fn find_arc(&self, from: usize, to: usize) -> Option<usize> {
        self.out_arcs[from]
            .iter()
            .copied()
            .find(|&a| self.arcs[a].to == to)
    }

    /// Arc indices leaving `j`, in insertion order.
    pub fn out_arcs(&self, j: usize) -> &[usize] {
        &self.out_arcs[j]
    }

    /// Arc indices entering `i`, in insertion order.
    pub fn in_arcs(&self, i: usize) -> &[usize] {
        &self.in_arcs[i]
    }

    pub fn total_rate(&self) -> f64 {
        self.nodes.iter().map(|n| n.rate).sum()
    }

    pub fn clocks(&self) -> impl Iterator<Item = &ClockParams> {
        self.nodes.iter().map(|n| &n.clock)
    }

    /// Nodes reachable from `root` following broadcast direction.
    pub fn reachable_from(&self, root: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(j) = queue.pop_front() {
            for &a in &self.out_arcs[j] {
                let i = self.arcs[a].to;
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        seen
    }

    /// Nodes from which every other node is reachable.
    pub fn centers(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&r| self.reachable_from(r).iter().all(|&s| s))
            .collect()
    }

    pub fn is_center(&self, node: usize) -> bool {
        node < self.n() && self.reachable_from(node).iter().all(|&s| s)
    }

    pub fn map_arcs(&self, mut f: impl FnMut(&mut Arc)) -> Result<Self> {
        let mut arcs = self.arcs.clone();
        arcs.iter_mut().for_each(&mut f);
        Self::new(self.nodes.clone(), arcs)
    }

    pub fn map_nodes(&self, mut f: impl FnMut(usize, &mut Node)) -> Result<Self> {
        let mut nodes = self.nodes.clone();
        nodes.iter_mut().enumerate().for_each(|(i, n)| f(i, n));
        Self::new(nodes, self.arcs.clone())
    }

    pub(crate) fn with_extra_arcs(&self, extra: Vec<Arc>) -> Result<Self> {
        let mut arcs = self.arcs.clone();
        arcs.extend(extra);
        Self::new(self.nodes.clone(), arcs)
    }

    pub fn to_toml_string(&self) -> String {
        let file = NetworkFile {
            schema_version: NETWORK_SCHEMA_VERSION,
            nodes: self.nodes.clone(),
            arcs: self.arcs.clone(),
        };
        toml::to_string(&file).expect("network is always serializable")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let file: NetworkFile = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        if file.schema_version != NETWORK_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported network schema_version {} (expected {})",
                file.schema_version, NETWORK_SCHEMA_VERSION
            )));
        }
        Self::new(file.nodes, file.arcs)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }
}

/// True iff some node reaches every other node along arc direction.
pub fn has_spanning_tree(net: &Network) -> bool {
    (0..net.n()).any(|r| net.reachable_from(r).iter().all(|&s| s))
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    pub fn node(alpha: f64, beta: f64) -> Node {
        Node {
            position: None,
            rate: 1.0,
            clock: ClockParams::new(alpha, beta, 0.0).unwrap(),
        }
    }

    pub fn arc(from: usize, to: usize) -> Arc {
        Arc {
            from,
            to,
            gamma: 1.0,
            p_hear: 1.0,
            delay: DelayModel::new(0.1, 0.0).unwrap(),
        }
    }

    pub fn net(n: usize, arcs: &[(usize, usize)]) -> Network {
        Network::new(
            (0..n).map(|_| node(1.0, 0.0)).collect(),
            arcs.iter().map(|&(j, i)| arc(j, i)).collect(),
        )
        .unwrap()
    }
}
