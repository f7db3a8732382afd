//! Clustering cost estimated from a positive-graph sparsifier and exact
//! positive degrees.

use crate::graph::{binom2, Clustering};
use crate::sketch::SparsifierGraph;

/// `Σ_C [∂_H(C) + |C|(|C|-1)/2 - ½ Σ_{u∈C} deg⁺(u)]`.
///
/// With an exact sparsifier this is the true cost: crossing positives
/// contribute `½∂` and intra-cluster negatives `binom(|C|, 2) - (Σdeg - ∂)/2`.
pub fn estimated_cost(h: &SparsifierGraph, pos_degrees: &[usize], c: &Clustering) -> f64 {
    let k = c.num_clusters();
    let mut boundary = vec![0.0; k];
    for &(u, v, w) in h.edges() {
        let (a, b) = (c.label(u), c.label(v));
        if a != b {
            boundary[a] += w;
            boundary[b] += w;
        }
    }
    let mut deg_sum = vec![0usize; k];
    for (u, &d) in pos_degrees.iter().enumerate() {
        deg_sum[c.label(u)] += d;
    }
    c.cluster_sizes()
        .iter()
        .enumerate()
        .map(|(i, &size)| boundary[i] + binom2(size) as f64 - 0.5 * deg_sum[i] as f64)
        .sum()
}

/// Estimate floored at zero.
pub fn estimated_cost_clamped(h: &SparsifierGraph, pos_degrees: &[usize], c: &Clustering) -> f64 {
    estimated_cost(h, pos_degrees, c).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::g3_complete;
    use crate::graph::{cost, generate_sbm};
    use rand::Rng;

    #[test]
    fn single_cluster_on_g3() {
        let g = g3_complete();
        let h = SparsifierGraph::exact(&g);
        let c = Clustering::one_cluster(3);
        assert_eq!(estimated_cost(&h, &g.pos_degrees(), &c), 1.0);
        assert_eq!(cost(&g, &c).unwrap(), 1);
    }

    #[test]
    fn singletons_count_positive_edges() {
        let (g, _) = generate_sbm(9, 3, 0.8, 2).unwrap();
        let h = SparsifierGraph::exact(&g);
        let e = estimated_cost(&h, &g.pos_degrees(), &Clustering::singletons(9));
        assert_eq!(e, g.num_pos() as f64);
    }

    #[test]
    fn exact_sparsifier_gives_exact_cost() {
        let mut rng = crate::rng::rng_from(21);
        for _ in 0..500 {
            let n = rng.gen_range(1..=8);
            let (g, _) = generate_sbm(n, rng.gen_range(1..=n), rng.gen_range(0.5..1.0), rng.gen())
                .unwrap();
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let c = Clustering::from_labels(labels);
            let h = SparsifierGraph::exact(&g);
            assert_eq!(estimated_cost(&h, &g.pos_degrees(), &c), cost(&g, &c).unwrap() as f64);
        }
    }

    #[test]
    fn clamping_floors_at_zero() {
        // An empty sparsifier underestimates crossing edges.
        let g = g3_complete();
        let h = SparsifierGraph::from_edges(3, vec![], 0.5).unwrap();
        let c = Clustering::singletons(3);
        assert!(estimated_cost(&h, &g.pos_degrees(), &c) < 0.0);
        assert_eq!(estimated_cost_clamped(&h, &g.pos_degrees(), &c), 0.0);
    }
}
