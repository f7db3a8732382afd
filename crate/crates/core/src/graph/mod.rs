//! Problem instances, clusterings and exact cost.

mod generate;
mod io;
mod optimum;
mod stream;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

pub use generate::generate_sbm;
pub use io::{load_edge_list, EdgeListOptions, LoadedGraph, SignConvention};
pub use optimum::{bad_triangle_lower_bound, brute_force_opt, BRUTE_FORCE_LIMIT};
pub use stream::{
    read_stream, replay, to_full_stream, to_stream, write_stream, Delta, EdgeUpdate, Stream,
    StreamMode,
};

pub type Vertex = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

/// Normalised unordered pair.
#[inline]
pub fn pair(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[inline]
pub(crate) fn binom2(k: usize) -> u64 {
    let k = k as u64;
    k * k.saturating_sub(1) / 2
}

/// A signed instance on dense vertex ids `0..n`.
///
/// In complete mode every pair that is not listed as positive is an implicit
/// negative; those pairs are never materialised.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    n: usize,
    pos: BTreeSet<(Vertex, Vertex)>,
    neg: BTreeSet<(Vertex, Vertex)>,
    complete: bool,
    pos_adj: Vec<Vec<Vertex>>,
}

impl SignedGraph {
    pub fn new<P, N>(n: usize, pos_edges: P, neg_edges: N, complete: bool) -> Result<Self>
    where
        P: IntoIterator<Item = (Vertex, Vertex)>,
        N: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let check = |u: Vertex, v: Vertex| -> Result<(Vertex, Vertex)> {
            if u == v {
                return Err(Error::Contract(format!("self-loop on vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::Contract(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            Ok(pair(u, v))
        };
        let pos = pos_edges
            .into_iter()
            .map(|(u, v)| check(u, v))
            .collect::<Result<BTreeSet<_>>>()?;
        let neg = neg_edges
            .into_iter()
            .map(|(u, v)| check(u, v))
            .collect::<Result<BTreeSet<_>>>()?;
        if complete && !neg.is_empty() {
            return Err(Error::Contract(
                "complete-mode graphs carry negatives implicitly".into(),
            ));
        }
        if let Some(e) = pos.intersection(&neg).next() {
            return Err(Error::Contract(format!(
                "pair {e:?} is both positive and negative"
            )));
        }
        let mut pos_adj = vec![Vec::new(); n];
        for &(u, v) in &pos {
            pos_adj[u].push(v);
            pos_adj[v].push(u);
        }
        for list in &mut pos_adj {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            pos,
            neg,
            complete,
            pos_adj,
        })
    }

    /// Complete-mode instance from its positive edges.
    pub fn complete<P>(n: usize, pos_edges: P) -> Result<Self>
    where
        P: IntoIterator<Item = (Vertex, Vertex)>,
    {
        Self::new(n, pos_edges, std::iter::empty(), true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn pos_edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.pos.iter().copied()
    }

    /// Explicit negative edges only; empty in complete mode.
    pub fn neg_edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.neg.iter().copied()
    }

    /// Every negative pair, implicit ones included.
    pub fn all_neg_edges(&self) -> Box<dyn Iterator<Item = (Vertex, Vertex)> + '_> {
        if self.complete {
            Box::new(
                (0..self.n)
                    .flat_map(move |u| (u + 1..self.n).map(move |v| (u, v)))
                    .filter(move |e| !self.pos.contains(e)),
            )
        } else {
            Box::new(self.neg.iter().copied())
        }
    }

    pub fn num_pos(&self) -> usize {
        self.pos.len()
    }

    /// Number of negative pairs, implicit ones included.
    pub fn num_neg(&self) -> u64 {
        if self.complete {
            binom2(self.n) - self.pos.len() as u64
        } else {
            self.neg.len() as u64
        }
    }

    /// Number of explicitly stored edges.
    pub fn num_explicit(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn pos_degree(&self, u: Vertex) -> usize {
        self.pos_adj[u].len()
    }

    pub fn pos_degrees(&self) -> Vec<usize> {
        self.pos_adj.iter().map(Vec::len).collect()
    }

    /// Sorted positive neighbourhood.
    pub fn pos_neighbors(&self, u: Vertex) -> &[Vertex] {
        &self.pos_adj[u]
    }

    pub fn is_pos(&self, u: Vertex, v: Vertex) -> bool {
        self.pos.contains(&pair(u, v))
    }

    /// Sign of the pair, `None` for an absent pair of a general graph.
    pub fn sign(&self, u: Vertex, v: Vertex) -> Option<Sign> {
        let e = pair(u, v);
        if self.pos.contains(&e) {
            Some(Sign::Positive)
        } else if self.complete || self.neg.contains(&e) {
            Some(Sign::Negative)
        } else {
            None
        }
    }
}

/// Total assignment of vertices to clusters.
///
/// Labels are canonicalised on construction (first occurrence in vertex order
/// gets label 0, the next new label 1, …), so `==` compares partitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clustering {
    labels: Vec<usize>,
}

impl Clustering {
    pub fn from_labels<L: AsRef<[usize]>>(labels: L) -> Self {
        let labels = labels.as_ref();
        let mut map = std::collections::HashMap::with_capacity(labels.len());
        let canonical = labels
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Self { labels: canonical }
    }

    /// Build from a list of clusters; fails unless they partition `0..n`.
    pub fn from_clusters(n: usize, clusters: &[Vec<Vertex>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (id, c) in clusters.iter().enumerate() {
            for &v in c {
                if v >= n {
                    return Err(Error::Contract(format!("vertex {v} out of range")));
                }
                if labels[v] != usize::MAX {
                    return Err(Error::Contract(format!("vertex {v} in two clusters")));
                }
                labels[v] = id;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Contract(format!("vertex {v} has no cluster")));
        }
        Ok(Self::from_labels(labels))
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
        }
    }

    pub fn one_cluster(n: usize) -> Self {
        Self { labels: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, v: Vertex) -> usize {
        self.labels[v]
    }

    pub fn same_cluster(&self, u: Vertex, v: Vertex) -> bool {
        self.labels[u] == self.labels[v]
    }

    pub fn num_clusters(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Clusters ordered by their smallest member, members ascending.
    pub fn clusters(&self) -> Vec<Vec<Vertex>> {
        let mut out = vec![Vec::new(); self.num_clusters()];
        for (v, &l) in self.labels.iter().enumerate() {
            out[l].push(v);
        }
        out
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_clusters()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Number of disagreements of `c` on `g`.
pub fn cost(g: &SignedGraph, c: &Clustering) -> Result<u64> {
    if c.len() != g.n() {
        return Err(Error::Contract(format!(
            "clustering labels {} vertices, graph has {}",
            c.len(),
            g.n()
        )));
    }
    let mut crossing = 0u64;
    let mut intra_pos = 0u64;
    for (u, v) in g.pos_edges() {
        if c.same_cluster(u, v) {
            intra_pos += 1;
        } else {
            crossing += 1;
        }
    }
    let intra_neg = if g.is_complete() {
        c.cluster_sizes().into_iter().map(binom2).sum::<u64>() - intra_pos
    } else {
        g.neg_edges().filter(|&(u, v)| c.same_cluster(u, v)).count() as u64
    };
    Ok(crossing + intra_neg)
}

/// A bijection `V → {1, …, n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomPermutation {
    rank: Vec<usize>,
    order: Vec<Vertex>,
    seed: Option<u64>,
}

impl RandomPermutation {
    pub fn from_seed(n: usize, seed: u64) -> Self {
        let mut order: Vec<Vertex> = (0..n).collect();
        order.shuffle(&mut rng::rng_from(seed));
        let mut p = Self::from_order(order).expect("shuffle is a permutation");
        p.seed = Some(seed);
        p
    }

    /// `order[i]` is the vertex of rank `i + 1`.
    pub fn from_order(order: Vec<Vertex>) -> Result<Self> {
        let n = order.len();
        let mut rank = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n || rank[v] != 0 {
                return Err(Error::Contract(format!(
                    "order is not a permutation of 0..{n}"
                )));
            }
            rank[v] = i + 1;
        }
        Ok(Self {
            rank,
            order,
            seed: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_order((0..n).collect()).expect("identity")
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 1-based rank of `v`.
    #[inline]
    pub fn rank(&self, v: Vertex) -> usize {
        self.rank[v]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.rank
    }

    /// Vertices in increasing rank.
    pub fn order(&self) -> &[Vertex] {
        &self.order
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The three-vertex example with vertices 1, 2, 3 mapped to 0, 1, 2.
    pub(crate) fn g3() -> SignedGraph {
        SignedGraph::new(3, [(0, 1), (1, 2)], [(0, 2)], false).unwrap()
    }

    pub(crate) fn g3_complete() -> SignedGraph {
        SignedGraph::complete(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn cost_examples() {
        let g = g3();
        assert_eq!(cost(&g, &Clustering::one_cluster(3)).unwrap(), 1);
        assert_eq!(cost(&g, &Clustering::from_labels([0, 0, 1])).unwrap(), 1);
        assert_eq!(cost(&g, &Clustering::singletons(3)).unwrap(), 2);
        let gc = g3_complete();
        assert_eq!(cost(&gc, &Clustering::one_cluster(3)).unwrap(), 1);
        assert_eq!(cost(&gc, &Clustering::singletons(3)).unwrap(), 2);
    }

    #[test]
    fn cost_rejects_partial_labels() {
        let err = cost(&g3(), &Clustering::from_labels([0, 0])).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn graph_invariants_enforced() {
        assert!(SignedGraph::new(3, [(0, 0)], [], false).is_err());
        assert!(SignedGraph::new(3, [(0, 3)], [], false).is_err());
        assert!(SignedGraph::new(3, [(0, 1)], [(1, 0)], false).is_err());
        assert!(SignedGraph::new(3, [(0, 1)], [(1, 2)], true).is_err());
    }

    #[test]
    fn complete_mode_counts_implicit_negatives() {
        let g = g3_complete();
        assert_eq!(g.num_neg(), 1);
        assert_eq!(g.all_neg_edges().collect::<Vec<_>>(), vec![(0, 2)]);
        assert_eq!(g.sign(0, 2), Some(Sign::Negative));
        assert_eq!(g3().sign(0, 2), Some(Sign::Negative));
        let sparse = SignedGraph::new(3, [(0, 1)], [], false).unwrap();
        assert_eq!(sparse.sign(0, 2), None);
    }

    #[test]
    fn clustering_canonicalises_labels() {
        let a = Clustering::from_labels([5, 5, 9]);
        let b = Clustering::from_labels([1, 1, 0]);
        assert_eq!(a, b);
        assert_eq!(a.clusters(), vec![vec![0, 1], vec![2]]);
        assert!(Clustering::from_clusters(3, &[vec![0, 1]]).is_err());
        assert!(Clustering::from_clusters(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn permutation_is_bijective_and_reproducible() {
        let p = RandomPermutation::from_seed(50, 11);
        let q = RandomPermutation::from_seed(50, 11);
        assert_eq!(p, q);
        let mut seen = vec![false; 50];
        for v in 0..50 {
            let r = p.rank(v);
            assert!((1..=50).contains(&r));
            assert!(!seen[r - 1]);
            seen[r - 1] = true;
            assert_eq!(p.order()[r - 1], v);
        }
        assert!(RandomPermutation::from_order(vec![0, 0]).is_err());
    }
}
