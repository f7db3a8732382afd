//! Offline pivot algorithms for complete graphs.
//!
//! Every randomised join reads `rng::coin(coins, pivot, vertex)` and succeeds
//! iff the coin is below `1 - p`. Algorithms that are equivalent under shared
//! randomness therefore produce identical output for the same seed.

use crate::error::{Error, Result};
use crate::graph::{cost, pair, Clustering, RandomPermutation, Sign, SignedGraph, Vertex};
use crate::predictor::{DistanceOracle, RoundingParams};
use crate::rng;

const UNASSIGNED: usize = usize::MAX;

/// Degree/rank truncation with budget `K = (c/ε)·n·ln n`.
///
/// `τ_u = K / deg⁺(u)`, `σ_u = K / π_u` and `ℓ_t = K / t`; all comparisons
/// are done on products against `K` so the equivalent forms agree exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationThresholds {
    n: usize,
    epsilon: f64,
    c: f64,
    budget: f64,
}

impl TruncationThresholds {
    pub const DEFAULT_EPSILON: f64 = 0.2;
    pub const DEFAULT_C: f64 = 4.0;

    pub fn new(n: usize, epsilon: f64, c: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.25) {
            return Err(Error::Parameter(format!("epsilon must be in (0, 1/4), got {epsilon}")));
        }
        if !(c > 0.0) {
            return Err(Error::Parameter(format!("c must be positive, got {c}")));
        }
        let budget = c / epsilon * n as f64 * (n.max(1) as f64).ln();
        Ok(Self {
            n,
            epsilon,
            c,
            budget,
        })
    }

    pub fn with_defaults(n: usize) -> Self {
        Self::new(n, Self::DEFAULT_EPSILON, Self::DEFAULT_C).expect("defaults are valid")
    }

    /// No vertex is ever truncated.
    pub fn untruncated(n: usize) -> Self {
        Self {
            n,
            epsilon: Self::DEFAULT_EPSILON,
            c: f64::INFINITY,
            budget: f64::INFINITY,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn tau(&self, deg: usize) -> f64 {
        self.budget / deg as f64
    }

    pub fn sigma(&self, rank: usize) -> f64 {
        self.budget / rank as f64
    }

    pub fn ell(&self, t: usize) -> f64 {
        self.budget / t as f64
    }

    /// `π_u ≥ τ_u`, equivalently `deg⁺(u) ≥ σ_u`.
    #[inline]
    pub fn is_uninteresting(&self, rank: usize, deg: usize) -> bool {
        rank as f64 * deg as f64 >= self.budget
    }

    /// `π_v < τ_u` for a pivot of rank `pivot_rank` and a vertex of degree `deg`.
    #[inline]
    pub fn below_tau(&self, pivot_rank: usize, deg: usize) -> bool {
        (pivot_rank as f64) * (deg as f64) < self.budget
    }

    /// `deg⁺(v) ≥ ℓ_t`.
    #[inline]
    pub fn forced_singleton(&self, t: usize, deg: usize) -> bool {
        deg > 0 && t as f64 * deg as f64 >= self.budget
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Prediction-free clustering.
    First,
    /// Prediction-guided clustering.
    Second,
}

impl Branch {
    pub fn index(self) -> u8 {
        match self {
            Branch::First => 1,
            Branch::Second => 2,
        }
    }
}

/// What the post-processing of a stream knows: which vertices are
/// interesting, the positive neighbourhoods recovered for them, and exact
/// positive degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreGraph {
    interesting: Vec<bool>,
    adj: Vec<Vec<Vertex>>,
    degrees: Vec<usize>,
}

impl StoreGraph {
    /// `adj[u]` is ignored for uninteresting `u`; lists are sorted and deduplicated.
    pub fn new(interesting: Vec<bool>, mut adj: Vec<Vec<Vertex>>, degrees: Vec<usize>) -> Result<Self> {
        let n = interesting.len();
        if adj.len() != n || degrees.len() != n {
            return Err(Error::Contract("store graph vectors differ in length".into()));
        }
        for (u, list) in adj.iter_mut().enumerate() {
            if !interesting[u] {
                list.clear();
                continue;
            }
            list.sort_unstable();
            list.dedup();
            if list.iter().any(|&v| v >= n || v == u) {
                return Err(Error::Contract(format!("bad neighbour list for vertex {u}")));
            }
        }
        Ok(Self {
            interesting,
            adj,
            degrees,
        })
    }

    /// The exact store for `g`: full neighbourhoods of interesting vertices.
    pub fn from_graph(g: &SignedGraph, perm: &RandomPermutation, thr: &TruncationThresholds) -> Self {
        let degrees = g.pos_degrees();
        let interesting: Vec<bool> = (0..g.n())
            .map(|u| !thr.is_uninteresting(perm.rank(u), degrees[u]))
            .collect();
        let adj = (0..g.n())
            .map(|u| {
                if interesting[u] {
                    g.pos_neighbors(u).to_vec()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self {
            interesting,
            adj,
            degrees,
        }
    }

    pub fn n(&self) -> usize {
        self.interesting.len()
    }

    pub fn is_interesting(&self, u: Vertex) -> bool {
        self.interesting[u]
    }

    pub fn num_interesting(&self) -> usize {
        self.interesting.iter().filter(|&&b| b).count()
    }

    pub fn neighbors(&self, u: Vertex) -> &[Vertex] {
        &self.adj[u]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Number of distinct stored positive edges.
    pub fn num_edges(&self) -> usize {
        let mut count = 0;
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if u < v || !self.interesting[v] {
                    count += 1;
                }
            }
        }
        count
    }

    fn is_pos(&self, pivot: Vertex, v: Vertex) -> bool {
        self.adj[pivot].binary_search(&v).is_ok()
    }

    fn check_against(&self, g: &SignedGraph, perm: &RandomPermutation, thr: &TruncationThresholds) -> Result<()> {
        if self.n() != g.n() || perm.len() != g.n() {
            return Err(Error::Contract("graph, store and permutation sizes differ".into()));
        }
        for u in 0..g.n() {
            if self.degrees[u] != g.pos_degree(u) {
                return Err(Error::Contract(format!("degree of vertex {u} does not match")));
            }
            let expect = !thr.is_uninteresting(perm.rank(u), self.degrees[u]);
            if self.interesting[u] != expect {
                return Err(Error::Contract(format!("interesting flag of vertex {u} is wrong")));
            }
            if self.interesting[u] && self.adj[u] != g.pos_neighbors(u) {
                return Err(Error::Contract(format!(
                    "stored neighbourhood of vertex {u} is not induced by the graph"
                )));
            }
        }
        Ok(())
    }

    /// Deterministic truncated pivot on this store; no consistency checks.
    pub fn truncated_pivot(&self, perm: &RandomPermutation, thr: &TruncationThresholds) -> Clustering {
        let n = self.n();
        let mut label = vec![UNASSIGNED; n];
        let mut pivots = Vec::new();
        for &u in perm.order() {
            if !self.interesting[u] || label[u] != UNASSIGNED {
                continue;
            }
            label[u] = u;
            pivots.push(u);
            for &v in &self.adj[u] {
                if self.interesting[v] && label[v] == UNASSIGNED {
                    label[v] = u;
                }
            }
        }
        // Pivots are visited in rank order, so the first eligible one wins.
        for &p in &pivots {
            for &u in &self.adj[p] {
                if !self.interesting[u]
                    && label[u] == UNASSIGNED
                    && thr.below_tau(perm.rank(p), self.degrees[u])
                {
                    label[u] = p;
                }
            }
        }
        finish(label)
    }

    /// Prediction-guided truncated pivot on this store; no consistency checks.
    pub fn truncated_pivot_pred(
        &self,
        perm: &RandomPermutation,
        oracle: &dyn DistanceOracle,
        thr: &TruncationThresholds,
        params: &RoundingParams,
        seed: u64,
    ) -> Clustering {
        let n = self.n();
        let coins = rng::derive_seed(seed, rng::TAG_COINS);
        let mut label = vec![UNASSIGNED; n];
        let mut pivots = Vec::new();
        for &u in perm.order() {
            if !self.interesting[u] || label[u] != UNASSIGNED {
                continue;
            }
            label[u] = u;
            pivots.push(u);
            for v in 0..n {
                if self.interesting[v] && label[v] == UNASSIGNED {
                    let sign = if self.is_pos(u, v) { Sign::Positive } else { Sign::Negative };
                    if joins(coins, u, v, sign, oracle, params) {
                        label[v] = u;
                    }
                }
            }
        }
        for u in 0..n {
            if self.interesting[u] {
                continue;
            }
            for &p in &pivots {
                if !thr.below_tau(perm.rank(p), self.degrees[u]) {
                    break;
                }
                let sign = if self.is_pos(p, u) { Sign::Positive } else { Sign::Negative };
                if joins(coins, p, u, sign, oracle, params) {
                    label[u] = p;
                    break;
                }
            }
        }
        finish(label)
    }
}

#[inline]
fn joins(
    coins: u64,
    pivot: Vertex,
    v: Vertex,
    sign: Sign,
    oracle: &dyn DistanceOracle,
    params: &RoundingParams,
) -> bool {
    let d = oracle.distance(pivot, v).clamp(0.0, 1.0);
    rng::coin(coins, pivot, v) < params.join_prob(sign, d)
}

fn finish(label: Vec<usize>) -> Clustering {
    let labels: Vec<usize> = label
        .iter()
        .enumerate()
        .map(|(u, &l)| if l == UNASSIGNED { u } else { l })
        .collect();
    Clustering::from_labels(labels)
}

fn check_complete(g: &SignedGraph) -> Result<()> {
    if g.is_complete() {
        Ok(())
    } else {
        Err(Error::Contract("pivot algorithms need a complete instance".into()))
    }
}

fn check_perm(g: &SignedGraph, perm: &RandomPermutation) -> Result<()> {
    if perm.len() == g.n() {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "permutation over {} vertices for a graph on {}",
            perm.len(),
            g.n()
        )))
    }
}

pub fn truncated_pivot(
    g: &SignedGraph,
    store: &StoreGraph,
    perm: &RandomPermutation,
    thr: &TruncationThresholds,
) -> Result<Clustering> {
    store.check_against(g, perm, thr)?;
    Ok(store.truncated_pivot(perm, thr))
}

pub fn truncated_pivot_pred(
    g: &SignedGraph,
    store: &StoreGraph,
    perm: &RandomPermutation,
    oracle: &dyn DistanceOracle,
    thr: &TruncationThresholds,
    params: &RoundingParams,
    seed: u64,
) -> Result<Clustering> {
    store.check_against(g, perm, thr)?;
    Ok(store.truncated_pivot_pred(perm, oracle, thr, params, seed))
}

fn degree_order(degrees: &[usize]) -> Vec<Vertex> {
    let mut by_degree: Vec<Vertex> = (0..degrees.len()).collect();
    by_degree.sort_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(a.cmp(&b)));
    by_degree
}

pub fn cklpu_pivot(g: &SignedGraph, perm: &RandomPermutation, thr: &TruncationThresholds) -> Result<Clustering> {
    check_perm(g, perm)?;
    let n = g.n();
    let degrees = g.pos_degrees();
    let by_degree = degree_order(&degrees);
    let mut next_heavy = 0;
    let mut label = vec![UNASSIGNED; n];
    for (i, &u) in perm.order().iter().enumerate() {
        let t = i + 1;
        while next_heavy < n && thr.forced_singleton(t, degrees[by_degree[next_heavy]]) {
            let v = by_degree[next_heavy];
            if label[v] == UNASSIGNED {
                label[v] = v;
            }
            next_heavy += 1;
        }
        if label[u] != UNASSIGNED {
            continue;
        }
        label[u] = u;
        for &v in g.pos_neighbors(u) {
            if label[v] == UNASSIGNED {
                label[v] = u;
            }
        }
    }
    Ok(finish(label))
}

pub fn pairwise_diss(
    g: &SignedGraph,
    perm: &RandomPermutation,
    oracle: &dyn DistanceOracle,
    thr: &TruncationThresholds,
    params: &RoundingParams,
    seed: u64,
) -> Result<Clustering> {
    check_complete(g)?;
    check_perm(g, perm)?;
    let n = g.n();
    let coins = rng::derive_seed(seed, rng::TAG_COINS);
    let degrees = g.pos_degrees();
    let by_degree = degree_order(&degrees);
    let mut next_heavy = 0;
    let mut label = vec![UNASSIGNED; n];
    for (i, &u) in perm.order().iter().enumerate() {
        let t = i + 1;
        while next_heavy < n && thr.forced_singleton(t, degrees[by_degree[next_heavy]]) {
            let v = by_degree[next_heavy];
            if label[v] == UNASSIGNED {
                label[v] = v;
            }
            next_heavy += 1;
        }
        if label[u] != UNASSIGNED {
            continue;
        }
        label[u] = u;
        for v in 0..n {
            if label[v] == UNASSIGNED {
                let sign = if g.is_pos(u, v) { Sign::Positive } else { Sign::Negative };
                if joins(coins, u, v, sign, oracle, params) {
                    label[v] = u;
                }
            }
        }
    }
    Ok(finish(label))
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        Err(Error::Parameter(format!("queue capacity k must be at least 2, got {k}")))
    } else {
        Ok(())
    }
}

/// Pivot with fresh-vertex counters; `π` supplies the order of picks.
pub fn cm_pivot(g: &SignedGraph, k: usize, perm: &RandomPermutation) -> Result<Clustering> {
    check_k(k)?;
    check_perm(g, perm)?;
    let n = g.n();
    let mut label = vec![UNASSIGNED; n];
    let mut counter = vec![0usize; n];
    for &w in perm.order() {
        if label[w] == UNASSIGNED {
            label[w] = w;
            for &v in g.pos_neighbors(w) {
                if label[v] == UNASSIGNED {
                    label[v] = w;
                }
            }
        } else {
            for &v in g.pos_neighbors(w) {
                if label[v] == UNASSIGNED {
                    counter[v] += 1;
                    if counter[v] == k {
                        label[v] = v;
                    }
                }
            }
        }
    }
    Ok(finish(label))
}

pub fn pairwise_diss2(
    g: &SignedGraph,
    oracle: &dyn DistanceOracle,
    k: usize,
    perm: &RandomPermutation,
    params: &RoundingParams,
    seed: u64,
) -> Result<Clustering> {
    check_k(k)?;
    check_complete(g)?;
    check_perm(g, perm)?;
    let n = g.n();
    let coins = rng::derive_seed(seed, rng::TAG_COINS);
    let mut label = vec![UNASSIGNED; n];
    let mut counter = vec![0usize; n];
    for &w in perm.order() {
        let pivot = label[w] == UNASSIGNED;
        if pivot {
            label[w] = w;
        }
        for v in 0..n {
            if label[v] != UNASSIGNED {
                continue;
            }
            let sign = if g.is_pos(w, v) { Sign::Positive } else { Sign::Negative };
            if !joins(coins, w, v, sign, oracle, params) {
                continue;
            }
            if pivot {
                label[v] = w;
            } else {
                counter[v] += 1;
                if counter[v] == k {
                    label[v] = v;
                }
            }
        }
    }
    Ok(finish(label))
}

/// Round every pair to a sign with positive probability `1 - p_uv`.
pub fn preround(
    g: &SignedGraph,
    oracle: &dyn DistanceOracle,
    params: &RoundingParams,
    seed: u64,
) -> Result<SignedGraph> {
    check_complete(g)?;
    let n = g.n();
    let coins = rng::derive_seed(seed, rng::TAG_PREROUND);
    let mut pos = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let sign = if g.is_pos(u, v) { Sign::Positive } else { Sign::Negative };
            let d = oracle.distance(u, v).clamp(0.0, 1.0);
            let (a, b) = pair(u, v);
            if rng::coin(coins, a, b) < params.join_prob(sign, d) {
                pos.push((u, v));
            }
        }
    }
    SignedGraph::complete(n, pos)
}

pub fn pairwise_diss2_preround(
    g: &SignedGraph,
    oracle: &dyn DistanceOracle,
    k: usize,
    perm: &RandomPermutation,
    params: &RoundingParams,
    seed: u64,
) -> Result<Clustering> {
    check_k(k)?;
    let rounded = preround(g, oracle, params, seed)?;
    cm_pivot(&rounded, k, perm)
}

/// Cluster vertices in `π` order from rank-sorted truncated neighbour sets.
///
/// A queue that holds fewer than `k` entries must contain its owner; a full
/// queue may have evicted it.
pub fn cluster_from_queues(perm: &RandomPermutation, queues: &[Vec<Vertex>], k: usize) -> Result<Clustering> {
    let n = perm.len();
    if queues.len() != n {
        return Err(Error::Contract(format!("{} queues for {n} vertices", queues.len())));
    }
    for (u, q) in queues.iter().enumerate() {
        if q.iter().any(|&v| v >= n) {
            return Err(Error::Contract(format!("queue of {u} names an unknown vertex")));
        }
        if q.len() < k && !q.contains(&u) {
            return Err(Error::Contract(format!("queue of {u} does not contain its owner")));
        }
        if q.windows(2).any(|w| perm.rank(w[0]) >= perm.rank(w[1])) {
            return Err(Error::Contract(format!("queue of {u} is not sorted by rank")));
        }
    }
    let mut label = vec![UNASSIGNED; n];
    let mut is_pivot = vec![false; n];
    for &u in perm.order() {
        if let Some(&v) = queues[u].iter().find(|&&v| v == u || is_pivot[v]) {
            label[u] = v;
            if v == u {
                is_pivot[u] = true;
            }
        }
    }
    Ok(finish(label))
}

/// Both branches of the offline pipeline and the one with lower exact cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfflineOutcome {
    pub first: Clustering,
    pub second: Clustering,
    pub cost_first: u64,
    pub cost_second: u64,
    pub chosen: Branch,
}

impl OfflineOutcome {
    pub fn clustering(&self) -> &Clustering {
        match self.chosen {
            Branch::First => &self.first,
            Branch::Second => &self.second,
        }
    }
}

pub fn offline_pipeline(
    g: &SignedGraph,
    perm: &RandomPermutation,
    oracle: &dyn DistanceOracle,
    thr: &TruncationThresholds,
    params: &RoundingParams,
    seed: u64,
) -> Result<OfflineOutcome> {
    check_complete(g)?;
    let store = StoreGraph::from_graph(g, perm, thr);
    let first = store.truncated_pivot(perm, thr);
    let second = store.truncated_pivot_pred(perm, oracle, thr, params, seed);
    let cost_first = cost(g, &first)?;
    let cost_second = cost(g, &second)?;
    let chosen = if cost_second < cost_first { Branch::Second } else { Branch::First };
    Ok(OfflineOutcome {
        first,
        second,
        cost_first,
        cost_second,
        chosen,
    })
}

/// Classic pivot: every vertex in `π` order that is still unclustered takes
/// its unclustered positive neighbours.
pub fn classic_pivot(g: &SignedGraph, perm: &RandomPermutation) -> Result<Clustering> {
    cklpu_pivot(g, perm, &TruncationThresholds::untruncated(g.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_sbm;
    use crate::graph::tests::g3_complete;
    use crate::predictor::{noisy_oracle, ConstantOracle, TableOracle};

    fn perm(order: &[usize]) -> RandomPermutation {
        RandomPermutation::from_order(order.to_vec()).unwrap()
    }

    fn cl(n: usize, clusters: &[Vec<usize>]) -> Clustering {
        Clustering::from_clusters(n, clusters).unwrap()
    }

    fn zero_one(g: &SignedGraph) -> TableOracle {
        TableOracle::indicator_of_graph(g)
    }

    #[test]
    fn thresholds() {
        let t = TruncationThresholds::new(10, 0.2, 4.0).unwrap();
        assert!((t.budget() - 20.0 * 10.0 * 10f64.ln()).abs() < 1e-9);
        assert!(TruncationThresholds::new(10, 0.3, 4.0).is_err());
        assert!(TruncationThresholds::new(10, 0.2, 0.0).is_err());
        let u = TruncationThresholds::untruncated(5);
        assert!(!u.is_uninteresting(5, 4));
        assert!(u.below_tau(5, 4));
        assert!(!u.forced_singleton(5, 4));
        let small = TruncationThresholds::new(10, 0.2, 0.01).unwrap();
        let k = small.budget();
        assert!(small.is_uninteresting(3, (k / 3.0).ceil() as usize));
        assert_eq!(small.is_uninteresting(4, 3), !small.below_tau(4, 3));
        assert_eq!(small.is_uninteresting(4, 3), small.forced_singleton(4, 3));
    }

    #[test]
    fn truncated_pivot_examples() {
        let g = g3_complete();
        let thr = TruncationThresholds::untruncated(3);
        let p = perm(&[1, 0, 2]);
        let store = StoreGraph::from_graph(&g, &p, &thr);
        assert_eq!(truncated_pivot(&g, &store, &p, &thr).unwrap(), Clustering::one_cluster(3));
        let p = perm(&[0, 1, 2]);
        let store = StoreGraph::from_graph(&g, &p, &thr);
        assert_eq!(truncated_pivot(&g, &store, &p, &thr).unwrap(), cl(3, &[vec![0, 1], vec![2]]));
        let empty = SignedGraph::complete(4, vec![]).unwrap();
        let p = RandomPermutation::identity(4);
        let store = StoreGraph::from_graph(&empty, &p, &thr);
        assert_eq!(truncated_pivot(&empty, &store, &p, &thr).unwrap(), Clustering::singletons(4));
    }

    #[test]
    fn non_induced_store_is_rejected() {
        let g = g3_complete();
        let thr = TruncationThresholds::untruncated(3);
        let p = perm(&[0, 1, 2]);
        let bad = StoreGraph::new(vec![true; 3], vec![vec![1], vec![0], vec![1]], g.pos_degrees()).unwrap();
        assert!(matches!(truncated_pivot(&g, &bad, &p, &thr), Err(Error::Contract(_))));
        let o = zero_one(&g);
        assert!(truncated_pivot_pred(&g, &bad, &p, &o, &thr, &RoundingParams::default(), 0).is_err());
    }

    #[test]
    fn truncated_pivot_pred_examples() {
        let g = g3_complete();
        let thr = TruncationThresholds::untruncated(3);
        let params = RoundingParams::default();
        let p = perm(&[0, 1, 2]);
        let store = StoreGraph::from_graph(&g, &p, &thr);
        let mut t = TableOracle::new(1.0);
        t.set(0, 1, 0.0);
        for seed in 0..20 {
            let c = truncated_pivot_pred(&g, &store, &p, &t, &thr, &params, seed).unwrap();
            assert_eq!(c, cl(3, &[vec![0, 1], vec![2]]));
        }
        let ones = ConstantOracle::new(1.0).unwrap();
        let c = truncated_pivot_pred(&g, &store, &p, &ones, &thr, &params, 3).unwrap();
        assert_eq!(c, Clustering::singletons(3));
    }

    #[test]
    fn cklpu_examples() {
        let g = g3_complete();
        let thr = TruncationThresholds::untruncated(3);
        assert_eq!(cklpu_pivot(&g, &perm(&[0, 1, 2]), &thr).unwrap(), cl(3, &[vec![0, 1], vec![2]]));
        let star = SignedGraph::complete(6, (1..6).map(|v| (0, v))).unwrap();
        let p = perm(&[0, 3, 1, 2, 5, 4]);
        assert_eq!(cklpu_pivot(&star, &p, &thr).unwrap(), Clustering::one_cluster(6));
    }

    #[test]
    fn cklpu_truncation_makes_hubs_singletons() {
        let star = SignedGraph::complete(6, (1..6).map(|v| (0, v))).unwrap();
        // A budget below the hub degree makes the hub a singleton at t = 1.
        let thr = TruncationThresholds::new(6, 0.2, 0.05).unwrap();
        assert!(thr.budget() < 5.0 && thr.budget() > 1.0);
        let p = perm(&[3, 0, 1, 2, 4, 5]);
        let c = cklpu_pivot(&star, &p, &thr).unwrap();
        assert_eq!(c, Clustering::singletons(6));
    }

    #[test]
    fn pairwise_diss_examples() {
        let g = g3_complete();
        let thr = TruncationThresholds::untruncated(3);
        let params = RoundingParams::default();
        let mut t = TableOracle::new(1.0);
        t.set(0, 1, 0.0);
        let c = pairwise_diss(&g, &perm(&[0, 1, 2]), &t, &thr, &params, 1).unwrap();
        assert_eq!(c, cl(3, &[vec![0, 1], vec![2]]));
        let ones = ConstantOracle::new(1.0).unwrap();
        let c = pairwise_diss(&g, &perm(&[2, 0, 1]), &ones, &thr, &params, 1).unwrap();
        assert_eq!(c, Clustering::singletons(3));
    }

    #[test]
    fn cm_pivot_examples() {
        let g = g3_complete();
        let p = perm(&[0, 1, 2]);
        assert_eq!(cm_pivot(&g, 2, &p).unwrap(), cl(3, &[vec![0, 1], vec![2]]));
        assert!(matches!(cm_pivot(&g, 1, &p), Err(Error::Parameter(_))));
        let empty = SignedGraph::complete(4, vec![]).unwrap();
        assert_eq!(cm_pivot(&empty, 2, &RandomPermutation::identity(4)).unwrap(), Clustering::singletons(4));
    }

    #[test]
    fn cm_pivot_counters_force_singletons() {
        // 0 pivots with 1 and 2; 3 is adjacent to 1 and 2 only; with k = 2 it
        // becomes a singleton once both non-pivots are picked.
        let g = SignedGraph::complete(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let p = RandomPermutation::identity(4);
        assert_eq!(cm_pivot(&g, 2, &p).unwrap(), cl(4, &[vec![0, 1, 2], vec![3]]));
        assert_eq!(cm_pivot(&g, 3, &p).unwrap(), cl(4, &[vec![0, 1, 2], vec![3]]));
        let c = cluster_from_queues(&p, &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]], 3).unwrap();
        assert_eq!(c, cl(4, &[vec![0, 1, 2], vec![3]]));
    }

    #[test]
    fn pairwise_diss2_examples() {
        let g = g3_complete();
        let params = RoundingParams::default();
        let p = perm(&[0, 1, 2]);
        let mut t = TableOracle::new(1.0);
        t.set(0, 1, 0.0);
        assert_eq!(pairwise_diss2(&g, &t, 2, &p, &params, 5).unwrap(), cl(3, &[vec![0, 1], vec![2]]));
        let zeros = ConstantOracle::new(0.0).unwrap();
        for seed in 0..10 {
            let c = pairwise_diss2(&g, &zeros, 2, &perm(&[2, 1, 0]), &params, seed).unwrap();
            assert_eq!(c, Clustering::one_cluster(3));
        }
        assert!(pairwise_diss2(&g, &zeros, 0, &p, &params, 0).is_err());
    }

    #[test]
    fn prerounding_examples() {
        let (g, _) = generate_sbm(8, 2, 0.7, 4).unwrap();
        let params = RoundingParams::default();
        let o = zero_one(&g);
        assert_eq!(preround(&g, &o, &params, 9).unwrap(), g);
        let ones = ConstantOracle::new(1.0).unwrap();
        let r = preround(&g, &ones, &params, 9).unwrap();
        assert_eq!(r.num_pos(), 0);
        let p = RandomPermutation::from_seed(8, 1);
        assert_eq!(pairwise_diss2_preround(&g, &ones, 2, &p, &params, 9).unwrap(), Clustering::singletons(8));
    }

    #[test]
    fn queue_examples() {
        let p = perm(&[0, 1, 2]);
        let queues = vec![vec![0, 1], vec![0, 1, 2], vec![1, 2]];
        assert_eq!(cluster_from_queues(&p, &queues, 3).unwrap(), cl(3, &[vec![0, 1], vec![2]]));
        let own: Vec<_> = (0..3).map(|u| vec![u]).collect();
        assert_eq!(cluster_from_queues(&p, &own, 2).unwrap(), Clustering::singletons(3));
        // Queue of 2 holds {1, 2} where 1 joined 0 and is not a pivot.
        let queues = vec![vec![0, 1], vec![0, 1], vec![1, 2]];
        assert_eq!(cluster_from_queues(&p, &queues, 2).unwrap(), cl(3, &[vec![0, 1], vec![2]]));
        let missing = vec![vec![0], vec![0], vec![1]];
        assert!(matches!(cluster_from_queues(&p, &missing, 3), Err(Error::Contract(_))));
        let unsorted = vec![vec![0], vec![1, 0], vec![2]];
        assert!(cluster_from_queues(&p, &unsorted, 3).is_err());
        // A full queue may have evicted its owner; a pivot in it still claims the vertex.
        let evicted = vec![vec![0, 1], vec![0, 1], vec![0, 1]];
        assert_eq!(cluster_from_queues(&p, &evicted, 2).unwrap(), cl(3, &[vec![0, 1, 2]]));
        // Without one, the vertex is a singleton.
        let orphan = vec![vec![0], vec![0, 1], vec![0, 2], vec![1, 2]];
        let p4 = perm(&[0, 1, 2, 3]);
        assert_eq!(cluster_from_queues(&p4, &orphan, 2).unwrap(), cl(4, &[vec![0, 1, 2], vec![3]]));
    }

    #[test]
    fn offline_pipeline_selects_cheaper_branch() {
        let (g, truth) = generate_sbm(20, 3, 0.8, 2).unwrap();
        let o = noisy_oracle(&truth, 0.0).unwrap();
        let thr = TruncationThresholds::with_defaults(20);
        for seed in 0..10 {
            let p = RandomPermutation::from_seed(20, seed);
            let out = offline_pipeline(&g, &p, &o, &thr, &RoundingParams::default(), seed).unwrap();
            assert_eq!(cost(&g, out.clustering()).unwrap(), out.cost_first.min(out.cost_second));
        }
    }
}
