use rand::Rng;

use super::{Clustering, SignedGraph};
use crate::error::{Error, Result};
use crate::rng;

/// Stochastic block model on complete graphs.
///
/// Vertices are split into `k` contiguous blocks whose sizes differ by at most
/// one (the first `n mod k` blocks get the extra vertex). Intra-block pairs are
/// positive with probability `p`, inter-block pairs with probability `1 - p`.
pub fn generate_sbm(n: usize, k: usize, p: f64, seed: u64) -> Result<(SignedGraph, Clustering)> {
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::Parameter(format!("SBM needs 0.5 < p <= 1, got {p}")));
    }
    if k == 0 || k > n.max(1) {
        return Err(Error::Parameter(format!(
            "cluster count {k} must be in 1..={n}"
        )));
    }
    let base = n / k;
    let extra = n % k;
    let mut labels = Vec::with_capacity(n);
    for b in 0..k {
        let size = base + usize::from(b < extra);
        labels.extend(std::iter::repeat(b).take(size));
    }
    let mut rng = rng::rng_from(seed);
    let mut pos = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let prob = if labels[u] == labels[v] { p } else { 1.0 - p };
            if rng.gen_bool(prob) {
                pos.push((u, v));
            }
        }
    }
    Ok((SignedGraph::complete(n, pos)?, Clustering::from_labels(labels)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cost;

    #[test]
    fn degenerate_probability_gives_two_triangles() {
        let (g, truth) = generate_sbm(6, 2, 1.0, 3).unwrap();
        let pos: Vec<_> = g.pos_edges().collect();
        assert_eq!(pos, vec![(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]);
        assert_eq!(cost(&g, &truth).unwrap(), 0);
    }

    #[test]
    fn uneven_split() {
        let (_, truth) = generate_sbm(10, 3, 0.9, 0).unwrap();
        assert_eq!(truth.cluster_sizes(), vec![4, 3, 3]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_sbm(10, 2, 0.5, 0).is_err());
        assert!(generate_sbm(10, 2, 1.2, 0).is_err());
        assert!(generate_sbm(10, 0, 0.9, 0).is_err());
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            generate_sbm(40, 4, 0.95, 17).unwrap(),
            generate_sbm(40, 4, 0.95, 17).unwrap()
        );
    }

    #[test]
    fn expected_positive_count() {
        // E|E+| = 0.9 * 4 * C(25,2) + 0.1 * (C(100,2) - 4 * C(25,2))
        let intra = 4.0 * 300.0;
        let total = 4950.0;
        let mean = 0.9 * intra + 0.1 * (total - intra);
        assert!((mean - 1455.0_f64).abs() < 1e-9);
        let var = intra * 0.9 * 0.1 + (total - intra) * 0.1 * 0.9;
        let trials = 200;
        let emp: f64 = (0..trials)
            .map(|s| generate_sbm(100, 4, 0.9, s).unwrap().0.num_pos() as f64)
            .sum::<f64>()
            / trials as f64;
        let se = (var / trials as f64).sqrt();
        assert!((emp - mean).abs() <= 3.0 * se, "empirical {emp} vs {mean}");
    }

    #[test]
    fn perfect_sbm_ground_truth_has_zero_cost() {
        for seed in 0..5 {
            let (g, truth) = generate_sbm(30, 3, 1.0, seed).unwrap();
            assert_eq!(cost(&g, &truth).unwrap(), 0);
        }
    }
}
