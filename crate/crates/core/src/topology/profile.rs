//! Broadcast/update probabilities and the expected update matrices.

use nalgebra::DMatrix;

use super::Network;

/// Unconditional broadcast and update probabilities of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityProfile {
    /// `pi_j = mu_j / mu_c`: probability that a global tick belongs to `j`.
    pub pi: Vec<f64>,
    /// `pi_ij = pi_j p_ij` indexed `[receiver][sender]`; zero off the arcs.
    pub pi_arc: DMatrix<f64>,
    /// Average number of updates per global tick.
    pub n_bar: f64,
    /// Probability that a given update happens at node `i`.
    pub p_update: Vec<f64>,
    /// Total broadcast rate `mu_c`.
    pub total_rate: f64,
}

/// Computes the probability profile of `net`.
///
/// `p_update[i] = sum_j pi_j p_ij / n_bar` is the long-run fraction of all
/// deliveries that land on node `i`.
pub fn probability_profile(net: &Network) -> ProbabilityProfile {
    let n = net.n();
    let total_rate = net.total_rate();
    let pi: Vec<f64> = net.nodes().iter().map(|node| node.rate / total_rate).collect();
    let mut pi_arc = DMatrix::zeros(n, n);
    for arc in net.arcs() {
        pi_arc[(arc.to, arc.from)] = pi[arc.from] * arc.p_hear;
    }
    let n_bar = pi_arc.sum();
    let p_update = (0..n)
        .map(|i| {
            if n_bar > 0.0 {
                pi_arc.row(i).sum() / n_bar
            } else {
                0.0
            }
        })
        .collect();
    ProbabilityProfile {
        pi,
        pi_arc,
        n_bar,
        p_update,
        total_rate,
    }
}

/// Expected weighted Laplacian: off-diagonal `gamma_ij pi_ij`, zero row sums.
pub fn expected_laplacian(net: &Network, profile: &ProbabilityProfile) -> DMatrix<f64> {
    let n = net.n();
    let mut lap = DMatrix::zeros(n, n);
    for arc in net.arcs() {
        let w = arc.gamma * profile.pi_arc[(arc.to, arc.from)];
        lap[(arc.to, arc.from)] += w;
        lap[(arc.to, arc.to)] -= w;
    }
    lap
}

/// Expected diagonal weight matrix, `(i, i) = sum_j gamma_ij pi_ij`.
pub fn expected_gamma_d(net: &Network, profile: &ProbabilityProfile) -> DMatrix<f64> {
    let n = net.n();
    let mut d = DMatrix::zeros(n, n);
    for arc in net.arcs() {
        d[(arc.to, arc.to)] += arc.gamma * profile.pi_arc[(arc.to, arc.from)];
    }
    d
}

#[cfg(test)]
mod tests {
    use super::super::test_util::net;
    use super::super::{generate_geometric, GeometricConfig};
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_pair() {
        let g = net(2, &[(0, 1), (1, 0)]);
        let p = probability_profile(&g);
        assert_eq!(p.pi, vec![0.5, 0.5]);
        assert!((p.n_bar - 1.0).abs() < 1e-15);
        assert_eq!(p.p_update, vec![0.5, 0.5]);
    }

    #[test]
    fn single_arc_leaves_sender_idle() {
        let g = net(2, &[(0, 1)]);
        let p = probability_profile(&g);
        assert!((p.n_bar - 0.5).abs() < 1e-15);
        assert_eq!(p.p_update, vec![0.0, 1.0]);
    }

    #[test]
    fn laplacian_of_symmetric_pair_with_quarter_probabilities() {
        // p_hear = 1/2 gives pi_ij = 1/4 on each arc.
        let g = net(2, &[(0, 1), (1, 0)]).map_arcs(|a| a.p_hear = 0.5).unwrap();
        let p = probability_profile(&g);
        let lap = expected_laplacian(&g, &p);
        let want = DMatrix::from_row_slice(2, 2, &[-0.25, 0.25, 0.25, -0.25]);
        assert!((lap - want).abs().max() < 1e-15);
        let d = expected_gamma_d(&g, &p);
        assert!((d - DMatrix::from_diagonal_element(2, 2, 0.25)).abs().max() < 1e-15);
    }

    #[test]
    fn muted_receiver_has_zero_row() {
        let g = net(3, &[(0, 1), (1, 0), (1, 2), (2, 1)])
            .map_arcs(|a| {
                if a.to == 0 {
                    a.gamma = 0.0
                }
            })
            .unwrap();
        let p = probability_profile(&g);
        let lap = expected_laplacian(&g, &p);
        assert!(lap.row(0).iter().all(|&x| x == 0.0));
        assert_eq!(expected_gamma_d(&g, &p)[(0, 0)], 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn profile_and_laplacian_invariants(seed in 0u64..10_000, n in 2usize..15,
                                            radius in 0.2f64..0.9, p_hear in 0.1f64..1.0) {
            let mut cfg = GeometricConfig::new(n, radius, 0.2);
            cfg.p_hear = p_hear;
            let g = generate_geometric(&cfg, seed).unwrap()
                .map_nodes(|i, node| node.rate = 0.5 + (i % 3) as f64)
                .unwrap();
            let p = probability_profile(&g);
            prop_assert!((p.pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((p.p_update.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..n {
                if !g.in_arcs(i).is_empty() {
                    prop_assert!(p.p_update[i] > 0.0);
                }
            }
            let lap = expected_laplacian(&g, &p);
            let d = expected_gamma_d(&g, &p);
            for i in 0..n {
                prop_assert!(lap.row(i).sum().abs() < 1e-14);
                prop_assert!(lap[(i, i)] <= 0.0);
                prop_assert!((d[(i, i)] + lap[(i, i)]).abs() < 1e-15);
                for j in 0..n {
                    if i != j {
                        prop_assert!(lap[(i, j)] >= 0.0);
                        prop_assert_eq!(d[(i, j)], 0.0);
                    }
                }
            }
        }
    }
}
