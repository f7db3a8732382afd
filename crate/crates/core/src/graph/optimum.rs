use super::{Clustering, SignedGraph};
use crate::error::{Error, Result};

/// Largest instance `brute_force_opt` will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Exact optimum by enumerating set partitions as restricted growth strings.
///
/// Partial assignments whose cost already reaches the incumbent are pruned;
/// the first partition (in enumeration order) attaining the minimum is kept.
pub fn brute_force_opt(g: &SignedGraph) -> Result<(u64, Clustering)> {
    let n = g.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n == 0 {
        return Ok((0, Clustering::singletons(0)));
    }
    // sign[i][j]: +1 positive, -1 negative, 0 neutral
    let mut sign = vec![vec![0i8; n]; n];
    let neutral = if g.is_complete() { -1 } else { 0 };
    for (i, row) in sign.iter_mut().enumerate() {
        for (j, s) in row.iter_mut().enumerate() {
            if i != j {
                *s = neutral;
            }
        }
    }
    for (u, v) in g.pos_edges() {
        sign[u][v] = 1;
        sign[v][u] = 1;
    }
    for (u, v) in g.neg_edges() {
        sign[u][v] = -1;
        sign[v][u] = -1;
    }

    struct Search<'a> {
        sign: &'a [Vec<i8>],
        labels: Vec<usize>,
        best: u64,
        best_labels: Vec<usize>,
    }

    impl Search<'_> {
        fn go(&mut self, i: usize, blocks: usize, acc: u64) {
            let n = self.labels.len();
            if acc >= self.best {
                return;
            }
            if i == n {
                self.best = acc;
                self.best_labels.copy_from_slice(&self.labels);
                return;
            }
            for b in 0..=blocks {
                let mut add = 0u64;
                for j in 0..i {
                    let same = self.labels[j] == b;
                    match self.sign[i][j] {
                        1 if !same => add += 1,
                        -1 if same => add += 1,
                        _ => {}
                    }
                }
                self.labels[i] = b;
                let next_blocks = if b == blocks { blocks + 1 } else { blocks };
                self.go(i + 1, next_blocks, acc + add);
            }
        }
    }

    let mut s = Search {
        sign: &sign,
        labels: vec![0; n],
        best: u64::MAX,
        best_labels: vec![0; n],
    };
    s.go(0, 0, 0);
    Ok((s.best, Clustering::from_labels(&s.best_labels)))
}

/// Lower bound on OPT from a greedy packing of edge-disjoint bad triangles
/// (two positive sides and one negative side).
pub fn bad_triangle_lower_bound(g: &SignedGraph) -> u64 {
    let n = g.n();
    let mut used = std::collections::HashSet::new();
    let mut count = 0u64;
    for u in 0..n {
        let nbrs = g.pos_neighbors(u);
        for (a, &v) in nbrs.iter().enumerate() {
            for &w in &nbrs[a + 1..] {
                // u is the apex: (u,v), (u,w) positive, (v,w) must be negative
                if g.sign(v, w) != Some(super::Sign::Negative) {
                    continue;
                }
                let e1 = super::pair(u, v);
                let e2 = super::pair(u, w);
                let e3 = super::pair(v, w);
                if used.contains(&e1) || used.contains(&e2) || used.contains(&e3) {
                    continue;
                }
                used.insert(e1);
                used.insert(e2);
                used.insert(e3);
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cost;
    use crate::graph::tests::{g3, g3_complete};

    /// Plain enumeration without pruning, used as an oracle.
    fn all_partitions(n: usize) -> Vec<Vec<usize>> {
        fn rec(i: usize, n: usize, cur: &mut Vec<usize>, blocks: usize, out: &mut Vec<Vec<usize>>) {
            if i == n {
                out.push(cur.clone());
                return;
            }
            for b in 0..=blocks {
                cur.push(b);
                rec(i + 1, n, cur, blocks.max(b + 1), out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, &mut Vec::new(), 0, &mut out);
        out
    }

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(all_partitions(n).len(), b);
        }
    }

    #[test]
    fn g3_optimum_is_one() {
        let (opt, w) = brute_force_opt(&g3()).unwrap();
        assert_eq!(opt, 1);
        assert_eq!(cost(&g3(), &w).unwrap(), 1);
        // Five partitions of three elements, min cost 1.
        let parts = all_partitions(3);
        assert_eq!(parts.len(), 5);
        let min = parts
            .iter()
            .map(|l| cost(&g3(), &Clustering::from_labels(l)).unwrap())
            .min()
            .unwrap();
        assert_eq!(min, 1);
        assert_eq!(brute_force_opt(&g3_complete()).unwrap().0, 1);
    }

    #[test]
    fn trivially_perfect_instances() {
        let tri = SignedGraph::complete(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(brute_force_opt(&tri).unwrap().0, 0);
        let two = SignedGraph::complete(4, [(0, 1), (2, 3)]).unwrap();
        let (opt, w) = brute_force_opt(&two).unwrap();
        assert_eq!(opt, 0);
        assert_eq!(w, Clustering::from_labels([0, 0, 1, 1]));
    }

    #[test]
    fn size_limit() {
        let g = SignedGraph::complete(13, []).unwrap();
        assert!(matches!(
            brute_force_opt(&g),
            Err(Error::SizeLimit { n: 13, .. })
        ));
    }

    #[test]
    fn pruned_search_matches_enumeration() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from(5);
        for trial in 0..40 {
            let n = 1 + trial % 7;
            let complete = trial % 2 == 0;
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    let x: f64 = rng.gen();
                    if x < 0.45 {
                        pos.push((u, v));
                    } else if x < 0.8 && !complete {
                        neg.push((u, v));
                    }
                }
            }
            let g = SignedGraph::new(n, pos, neg, complete).unwrap();
            let expected = all_partitions(n)
                .iter()
                .map(|l| cost(&g, &Clustering::from_labels(l)).unwrap())
                .min()
                .unwrap();
            let (opt, w) = brute_force_opt(&g).unwrap();
            assert_eq!(opt, expected);
            assert_eq!(cost(&g, &w).unwrap(), opt);
            assert!(bad_triangle_lower_bound(&g) <= opt);
        }
    }
}
