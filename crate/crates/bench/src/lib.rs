//! Shared fixtures for the benchmarks.

use nalgebra::DMatrix;
use tsync::analysis::{applied_exponent, build_b_bar, spectral_check, ZERO_TOL};
use tsync::topology::{generate_geometric, probability_profile};
use tsync::{DriftVariant, GeometricConfig, Network};

/// Default geometric network on `n` nodes, radius scaled to keep the
/// neighborhood size of the 10-node default.
pub fn network(n: usize, seed: u64) -> Network {
    let mut g = GeometricConfig::default();
    g.radius *= (g.n as f64 / n as f64).sqrt();
    g.n = n;
    generate_geometric(&g, seed).expect("generated network")
}

/// Expected update matrix of `net` for the default drift variant.
pub fn b_bar(net: &Network) -> DMatrix<f64> {
    let zeta = applied_exponent(&DriftVariant::default(), 0.99);
    build_b_bar(net, &probability_profile(net), zeta).expect("b bar")
}

/// Stable consensus block of `b_bar(net)`.
pub fn b_star(net: &Network) -> DMatrix<f64> {
    spectral_check(&b_bar(net), ZERO_TOL).b_star
}
