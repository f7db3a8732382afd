//! Weighted cut sparsifiers of the positive graph, built by merge-and-reduce
//! over an insertion-only stream.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{pair, Delta, EdgeUpdate, Sign, SignedGraph, Vertex};
use crate::rng;
use crate::sketch::resistance::ResistanceOracle;

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifierGraph {
    n: usize,
    edges: Vec<(Vertex, Vertex, f64)>,
    epsilon: f64,
}

impl SparsifierGraph {
    /// Every positive edge of `g` with unit weight.
    pub fn exact(g: &SignedGraph) -> Self {
        Self {
            n: g.n(),
            edges: g.pos_edges().map(|(u, v)| (u, v, 1.0)).collect(),
            epsilon: 0.0,
        }
    }

    pub fn from_edges(n: usize, edges: Vec<(Vertex, Vertex, f64)>, epsilon: f64) -> Result<Self> {
        for &(u, v, w) in &edges {
            if u >= n || v >= n || u == v {
                return Err(Error::Contract(format!("bad sparsifier edge ({u}, {v})")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Contract(format!("edge ({u}, {v}) has weight {w}")));
            }
        }
        let mut edges: Vec<_> = edges
            .into_iter()
            .map(|(u, v, w)| {
                let (a, b) = pair(u, v);
                (a, b, w)
            })
            .collect();
        edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        Ok(Self { n, edges, epsilon })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(Vertex, Vertex, f64)] {
        &self.edges
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Weighted degrees.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for &(u, v, w) in &self.edges {
            d[u] += w;
            d[v] += w;
        }
        d
    }

    /// Weight of edges with exactly one endpoint marked in `in_a`.
    pub fn cut_weight_mask(&self, in_a: &[bool]) -> f64 {
        self.edges
            .iter()
            .filter(|&&(u, v, _)| in_a[u] != in_a[v])
            .map(|e| e.2)
            .sum()
    }

    pub fn cut_weight(&self, a: &[Vertex]) -> f64 {
        let mut mask = vec![false; self.n];
        for &u in a {
            mask[u] = true;
        }
        self.cut_weight_mask(&mask)
    }

    /// Three words per stored edge.
    pub fn words(&self) -> usize {
        3 * self.edges.len()
    }
}

pub fn cut_weight(h: &SparsifierGraph, a: &[Vertex]) -> f64 {
    h.cut_weight(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsifierMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsifierParams {
    pub epsilon: f64,
    pub mode: SparsifierMode,
    /// Oversampling constant in the keep probability.
    pub c: f64,
    /// Buffer size that triggers a reduce; `None` means `ε⁻² n ln n`.
    pub buffer: Option<usize>,
}

impl Default for SparsifierParams {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            mode: SparsifierMode::Sampled,
            c: 8.0,
            buffer: None,
        }
    }
}

impl SparsifierParams {
    pub fn exact() -> Self {
        Self {
            epsilon: 0.0,
            mode: SparsifierMode::Exact,
            ..Self::default()
        }
    }

    pub fn sampled(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }
}

/// Incremental merge-and-reduce builder.
#[derive(Debug, Clone)]
pub struct SparsifierBuilder {
    n: usize,
    params: SparsifierParams,
    threshold: usize,
    kept: BTreeMap<(Vertex, Vertex), f64>,
    buffer: Vec<(Vertex, Vertex)>,
    rng: rand_chacha::ChaCha8Rng,
    words_peak: usize,
    reductions: usize,
}

impl SparsifierBuilder {
    pub fn new(n: usize, params: SparsifierParams, seed: u64) -> Result<Self> {
        if params.mode == SparsifierMode::Sampled {
            if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
                return Err(Error::Parameter(format!(
                    "sparsifier epsilon must be in (0, 1), got {}",
                    params.epsilon
                )));
            }
            if !(params.c > 0.0) {
                return Err(Error::Parameter(format!("sampling constant {} <= 0", params.c)));
            }
        }
        let ln_n = (n.max(2) as f64).ln();
        let threshold = params.buffer.unwrap_or_else(|| {
            (n as f64 * ln_n / (params.epsilon * params.epsilon)).ceil() as usize
        });
        Ok(Self {
            n,
            params,
            threshold: threshold.max(1),
            kept: BTreeMap::new(),
            buffer: Vec::new(),
            rng: rng::rng_from(rng::derive_seed(seed, rng::TAG_SPARSIFIER)),
            words_peak: 0,
            reductions: 0,
        })
    }

    /// Feed one update; negative-sign updates are ignored.
    pub fn push(&mut self, up: &EdgeUpdate) -> Result<()> {
        if up.sign != Sign::Positive {
            return Ok(());
        }
        if up.delta == Delta::Delete {
            return Err(Error::UnsupportedMode(
                "sparsifier construction needs an insertion-only stream".into(),
            ));
        }
        self.insert(up.u, up.v);
        Ok(())
    }

    pub fn insert(&mut self, u: Vertex, v: Vertex) {
        self.buffer.push(pair(u, v));
        if self.params.mode == SparsifierMode::Sampled && self.buffer.len() > self.threshold {
            self.reduce();
        }
        self.words_peak = self.words_peak.max(self.words());
    }

    fn merge_buffer(&mut self) {
        for e in self.buffer.drain(..) {
            *self.kept.entry(e).or_insert(0.0) += 1.0;
        }
    }

    fn reduce(&mut self) {
        self.merge_buffer();
        self.reductions += 1;
        let edges: Vec<_> = self.kept.iter().map(|(&(u, v), &w)| (u, v, w)).collect();
        let oracle = ResistanceOracle::new(self.n, &edges);
        let scale = self.params.c * (self.n.max(2) as f64).ln()
            / (self.params.epsilon * self.params.epsilon);
        let mut next = BTreeMap::new();
        for (u, v, w) in edges {
            let p = (scale * w * oracle.resistance(u, v)).min(1.0);
            if p >= 1.0 || self.rng.gen::<f64>() < p {
                next.insert((u, v), w / p);
            }
        }
        self.kept = next;
    }

    pub fn words(&self) -> usize {
        3 * self.kept.len() + 2 * self.buffer.len()
    }

    pub fn words_peak(&self) -> usize {
        self.words_peak
    }

    pub fn reductions(&self) -> usize {
        self.reductions
    }

    pub fn finish(mut self) -> SparsifierGraph {
        self.merge_buffer();
        let epsilon = match self.params.mode {
            SparsifierMode::Exact => 0.0,
            SparsifierMode::Sampled => self.params.epsilon,
        };
        SparsifierGraph {
            n: self.n,
            edges: self.kept.into_iter().map(|((u, v), w)| (u, v, w)).collect(),
            epsilon,
        }
    }
}

pub fn build_sparsifier<'a>(
    n: usize,
    updates: impl IntoIterator<Item = &'a EdgeUpdate>,
    params: SparsifierParams,
    seed: u64,
) -> Result<SparsifierGraph> {
    let mut b = SparsifierBuilder::new(n, params, seed)?;
    for up in updates {
        b.push(up)?;
    }
    Ok(b.finish())
}
