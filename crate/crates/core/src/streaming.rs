//! End-to-end streaming algorithms for complete instances: the dynamic-stream
//! algorithm built on ℓ0-samplers and the insertion-only algorithm built on
//! bounded neighbour queues.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{replay, Clustering, Delta, RandomPermutation, Sign, SignedGraph, Stream, Vertex};
use crate::pivot::{cluster_from_queues, Branch, StoreGraph, TruncationThresholds};
use crate::predictor::{DistanceOracle, RoundingParams};
use crate::rng;
use crate::sketch::{
    estimated_cost, SamplerBank, SparsifierBuilder, SparsifierGraph, SparsifierParams, SpaceMeter,
};

/// Permutation shared by every algorithm run with `seed`.
pub fn permutation_for(n: usize, seed: u64) -> RandomPermutation {
    RandomPermutation::from_seed(n, rng::derive_seed(seed, rng::TAG_PERMUTATION))
}

/// How post-processing learns the neighbourhoods of interesting vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryMode {
    /// Peel the ℓ0-samplers.
    Samplers,
    /// Read them off the replayed stream; for coupling tests only.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicParams {
    pub epsilon: f64,
    pub c: f64,
    /// Per-sampler failure probability.
    pub delta: f64,
    /// Per-vertex sampler cap; `None` means `⌈64 ln n⌉`.
    pub max_samplers: Option<usize>,
    pub recovery: RecoveryMode,
    pub rounding: RoundingParams,
    /// Parameters of the cost-estimation sparsifier.
    pub sparsifier: SparsifierParams,
    pub clamp_estimates: bool,
}

impl Default for DynamicParams {
    fn default() -> Self {
        Self {
            epsilon: TruncationThresholds::DEFAULT_EPSILON,
            c: TruncationThresholds::DEFAULT_C,
            delta: 0.1,
            max_samplers: None,
            recovery: RecoveryMode::Samplers,
            rounding: RoundingParams::default(),
            sparsifier: SparsifierParams::sampled(TruncationThresholds::DEFAULT_EPSILON),
            clamp_estimates: false,
        }
    }
}

pub fn default_sampler_cap(n: usize) -> usize {
    (64.0 * (n.max(2) as f64).ln()).ceil() as usize
}

/// `min(⌈10 c ln n σ_u⌉, cap)`, at least one.
pub fn sampler_counts(perm: &RandomPermutation, thr: &TruncationThresholds, cap: usize) -> Vec<usize> {
    let n = perm.len();
    let ln_n = (n.max(2) as f64).ln();
    (0..n)
        .map(|u| {
            let target = 10.0 * thr.c() * ln_n * thr.sigma(perm.rank(u));
            if target.is_finite() {
                (target.ceil() as usize).clamp(1, cap.max(1))
            } else {
                cap.max(1)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicReport {
    pub n: usize,
    pub chosen: Branch,
    pub est_cost_first: f64,
    pub est_cost_second: f64,
    pub first: Clustering,
    pub second: Clustering,
    /// Peak words of samplers, counters and recovered edges.
    pub words_peak: usize,
    pub sampler_words: usize,
    /// Words of the replay-built cost sparsifier, kept apart from `words_peak`.
    pub concession_words: usize,
    pub interesting: usize,
    pub recovered_edges: usize,
    /// Vertices whose recovered neighbourhood is smaller than their degree.
    pub incomplete_vertices: usize,
    pub runtime_ms: f64,
}

impl DynamicReport {
    pub fn recovery_complete(&self) -> bool {
        self.incomplete_vertices == 0
    }
}

fn choose(est_first: f64, est_second: f64) -> Branch {
    if est_second < est_first {
        Branch::Second
    } else {
        Branch::First
    }
}

fn estimate(h: &SparsifierGraph, deg: &[usize], c: &Clustering, clamp: bool) -> f64 {
    let e = estimated_cost(h, deg, c);
    if clamp {
        e.max(0.0)
    } else {
        e
    }
}

fn check_update(stream: &Stream, i: usize, u: Vertex, v: Vertex) -> Result<()> {
    if u == v || u >= stream.n || v >= stream.n {
        return Err(Error::StreamIntegrity(format!(
            "item {i}: invalid pair ({u}, {v}) for n = {}",
            stream.n
        )));
    }
    Ok(())
}

fn require_complete(stream: &Stream) -> Result<()> {
    if stream.complete {
        Ok(())
    } else {
        Err(Error::UnsupportedMode("this algorithm needs a complete instance".into()))
    }
}

pub fn dynamic_cc(
    stream: &Stream,
    oracle: &dyn DistanceOracle,
    params: &DynamicParams,
    seed: u64,
) -> Result<(Clustering, DynamicReport)> {
    let start = Instant::now();
    require_complete(stream)?;
    let n = stream.n;
    let thr = TruncationThresholds::new(n, params.epsilon, params.c)?;
    let perm = permutation_for(n, seed);
    let cap = params.max_samplers.unwrap_or_else(|| default_sampler_cap(n));
    let counts = sampler_counts(&perm, &thr, cap);
    let mut bank = SamplerBank::new(n, &counts, params.delta, rng::derive_seed(seed, rng::TAG_SAMPLERS))?;
    let mut meter = SpaceMeter::new();
    let sampler_words = bank.words();
    // Rank and degree counter per vertex.
    meter.alloc(sampler_words + 2 * n);

    let mut deg = vec![0i64; n];
    for (i, up) in stream.updates.iter().enumerate() {
        check_update(stream, i, up.u, up.v)?;
        if up.sign != Sign::Positive {
            continue;
        }
        let d = up.delta.as_i64();
        deg[up.u] += d;
        deg[up.v] += d;
        if deg[up.u] < 0 || deg[up.v] < 0 {
            return Err(Error::StreamIntegrity(format!(
                "item {i}: delete of ({}, {}) drives a degree negative",
                up.u, up.v
            )));
        }
        bank.update(up.u, up.v, d);
        bank.update(up.v, up.u, d);
    }
    let deg: Vec<usize> = deg.into_iter().map(|d| d as usize).collect();

    let interesting: Vec<bool> = (0..n).map(|u| !thr.is_uninteresting(perm.rank(u), deg[u])).collect();
    let replayed: Option<SignedGraph> = match params.recovery {
        RecoveryMode::Exact => Some(replay(stream)?),
        RecoveryMode::Samplers => None,
    };
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for u in (0..n).filter(|&u| interesting[u]) {
        adj[u] = match &replayed {
            Some(g) => g.pos_neighbors(u).to_vec(),
            None => bank.recover(u).neighbors,
        };
    }
    // An edge recovered from either interesting endpoint is known to both.
    for u in 0..n {
        for i in 0..adj[u].len() {
            let v = adj[u][i];
            if interesting[v] && !adj[v].contains(&u) {
                adj[v].push(u);
            }
        }
    }
    let incomplete_vertices = (0..n)
        .filter(|&u| interesting[u] && {
            let mut a = adj[u].clone();
            a.sort_unstable();
            a.dedup();
            a.len() < deg[u]
        })
        .count();
    let store = StoreGraph::new(interesting, adj, deg.clone())?;
    let recovered_edges = store.num_edges();
    let adj_words: usize = (0..n).map(|u| store.neighbors(u).len()).sum();
    meter.alloc(adj_words);

    let first = store.truncated_pivot(&perm, &thr);
    let second = store.truncated_pivot_pred(&perm, oracle, &thr, &params.rounding, seed);

    let h = cost_sparsifier(stream, replayed.as_ref(), params.sparsifier, seed)?;
    let est_cost_first = estimate(&h, &deg, &first, params.clamp_estimates);
    let est_cost_second = estimate(&h, &deg, &second, params.clamp_estimates);
    let chosen = choose(est_cost_first, est_cost_second);
    let out = match chosen {
        Branch::First => first.clone(),
        Branch::Second => second.clone(),
    };
    let report = DynamicReport {
        n,
        chosen,
        est_cost_first,
        est_cost_second,
        first,
        second,
        words_peak: meter.peak(),
        sampler_words,
        concession_words: h.words(),
        interesting: store.num_interesting(),
        recovered_edges,
        incomplete_vertices,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((out, report))
}

/// Sparsifier of the net positive graph, built after the pass from a replay
/// of the stream.
fn cost_sparsifier(
    stream: &Stream,
    replayed: Option<&SignedGraph>,
    params: SparsifierParams,
    seed: u64,
) -> Result<SparsifierGraph> {
    let owned;
    let g = match replayed {
        Some(g) => g,
        None => {
            owned = replay(stream)?;
            &owned
        }
    };
    let mut b = SparsifierBuilder::new(g.n(), params, seed)?;
    for (u, v) in g.pos_edges() {
        b.insert(u, v);
    }
    Ok(b.finish())
}

/// Rank-ordered set of at most `k` vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborQueue {
    k: usize,
    items: Vec<Vertex>,
}

impl NeighborQueue {
    pub fn new(owner: Vertex, k: usize) -> Self {
        let mut items = Vec::with_capacity(k + 1);
        items.push(owner);
        Self { k, items }
    }

    /// Admit `v`, evicting the highest rank if over capacity.
    pub fn push(&mut self, v: Vertex, perm: &RandomPermutation) {
        let rank = perm.rank(v);
        match self.items.binary_search_by_key(&rank, |&x| perm.rank(x)) {
            Ok(_) => {}
            Err(pos) => {
                if pos >= self.k {
                    return;
                }
                self.items.insert(pos, v);
                self.items.truncate(self.k);
            }
        }
    }

    pub fn items(&self) -> &[Vertex] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionParams {
    pub k: usize,
    pub rounding: RoundingParams,
    pub sparsifier: SparsifierParams,
    pub clamp_estimates: bool,
}

impl Default for InsertionParams {
    fn default() -> Self {
        Self {
            k: 10,
            rounding: RoundingParams::default(),
            sparsifier: SparsifierParams::sampled(TruncationThresholds::DEFAULT_EPSILON),
            clamp_estimates: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertionReport {
    pub n: usize,
    pub k: usize,
    pub chosen: Branch,
    pub est_cost_first: f64,
    pub est_cost_second: f64,
    pub first: Clustering,
    pub second: Clustering,
    /// Peak words of queues, counters and the sparsifier.
    pub words_peak: usize,
    pub sparsifier_edges: usize,
    pub runtime_ms: f64,
}

/// Insertion-only algorithm. Needs every pair in the stream, negatives
/// included, since negative pairs may enter the prediction queues.
pub fn insertion_cc(
    stream: &Stream,
    oracle: &dyn DistanceOracle,
    params: &InsertionParams,
    seed: u64,
) -> Result<(Clustering, InsertionReport)> {
    let start = Instant::now();
    require_complete(stream)?;
    if params.k < 2 {
        return Err(Error::Parameter(format!("queue capacity k must be at least 2, got {}", params.k)));
    }
    if stream.has_deletions() {
        return Err(Error::UnsupportedMode("the queue algorithm needs an insertion-only stream".into()));
    }
    let n = stream.n;
    let k = params.k;
    let perm = permutation_for(n, seed);
    let coins = rng::derive_seed(seed, rng::TAG_COINS);
    let mut a: Vec<NeighborQueue> = (0..n).map(|u| NeighborQueue::new(u, k)).collect();
    let mut b: Vec<NeighborQueue> = a.clone();
    let mut deg = vec![0usize; n];
    let mut sparsifier = SparsifierBuilder::new(n, params.sparsifier, seed)?;
    let mut meter = SpaceMeter::new();
    let mut queue_words = 2 * n;
    meter.set(queue_words + 2 * n);

    for (i, up) in stream.updates.iter().enumerate() {
        check_update(stream, i, up.u, up.v)?;
        debug_assert_eq!(up.delta, Delta::Insert);
        let (u, v) = (up.u, up.v);
        let before = a[u].len() + a[v].len() + b[u].len() + b[v].len();
        if up.sign == Sign::Positive {
            a[u].push(v, &perm);
            a[v].push(u, &perm);
            deg[u] += 1;
            deg[v] += 1;
            sparsifier.push(up)?;
        }
        let d = oracle.distance(u, v).clamp(0.0, 1.0);
        let join = params.rounding.join_prob(up.sign, d);
        if rng::coin(coins, u, v) < join {
            b[v].push(u, &perm);
        }
        if rng::coin(coins, v, u) < join {
            b[u].push(v, &perm);
        }
        queue_words = queue_words + a[u].len() + a[v].len() + b[u].len() + b[v].len() - before;
        meter.set(queue_words + 2 * n + sparsifier.words());
    }
    let h = sparsifier.finish();
    meter.set(queue_words + 2 * n + h.words());

    let lists = |qs: &[NeighborQueue]| qs.iter().map(|q| q.items().to_vec()).collect::<Vec<_>>();
    let first = cluster_from_queues(&perm, &lists(&a), k)?;
    let second = cluster_from_queues(&perm, &lists(&b), k)?;
    let est_cost_first = estimate(&h, &deg, &first, params.clamp_estimates);
    let est_cost_second = estimate(&h, &deg, &second, params.clamp_estimates);
    let chosen = choose(est_cost_first, est_cost_second);
    let out = match chosen {
        Branch::First => first.clone(),
        Branch::Second => second.clone(),
    };
    let report = InsertionReport {
        n,
        k,
        chosen,
        est_cost_first,
        est_cost_second,
        first,
        second,
        words_peak: meter.peak(),
        sparsifier_edges: h.len(),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((out, report))
}
