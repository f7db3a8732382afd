//! Prediction-guided ball growing on a positive sparsifier, for general
//! (non-complete) instances.

use std::collections::HashMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{pair, replay, Clustering, Delta, Sign, Stream, Vertex};
use crate::predictor::{adapted_quality_l, DistanceOracle};
use crate::sketch::{SparsifierBuilder, SparsifierGraph, SparsifierParams, SpaceMeter};

/// Radius used when no radius below 1/3 meets the stopping rule.
pub const SAFEGUARD_RADIUS: f64 = 1.0 / 3.0 - 1e-9;

/// `3 ln(n + 1)`.
pub fn stopping_factor(n: usize) -> f64 {
    3.0 * ((n + 1) as f64).ln()
}

fn dist(o: &dyn DistanceOracle, u: Vertex, v: Vertex) -> f64 {
    o.distance(u, v).clamp(0.0, 1.0)
}

/// `Σ_{E_H}` w·d over the whole sparsifier.
pub fn total_volume(h: &SparsifierGraph, oracle: &dyn DistanceOracle) -> f64 {
    h.edges().iter().map(|&(u, v, w)| w * dist(oracle, u, v)).sum()
}

/// Cut weight of `members` inside the subgraph induced by `remaining`.
pub fn boundary_weight(h: &SparsifierGraph, remaining: &[bool], members: &[Vertex]) -> f64 {
    let mut inside = vec![false; h.n()];
    for &v in members {
        inside[v] = true;
    }
    h.edges()
        .iter()
        .filter(|&&(u, v, _)| remaining[u] && remaining[v] && inside[u] != inside[v])
        .map(|e| e.2)
        .sum()
}

/// Volume of a ball inside the remainder, from scratch.
pub fn ball_volume_in(
    h: &SparsifierGraph,
    oracle: &dyn DistanceOracle,
    remaining: &[bool],
    vstar: f64,
    center: Vertex,
    members: &[Vertex],
    r: f64,
) -> Result<f64> {
    let mut inside = vec![false; h.n()];
    for &v in members {
        let d = dist(oracle, center, v);
        if d > r {
            return Err(Error::Contract(format!("member {v} at distance {d} beyond radius {r}")));
        }
        inside[v] = true;
    }
    let mut vol = vstar / h.n() as f64;
    for &(v, w, wt) in h.edges() {
        if !(remaining[v] && remaining[w]) {
            continue;
        }
        match (inside[v], inside[w]) {
            (true, true) => vol += wt * dist(oracle, v, w),
            (true, false) => vol += wt * (r - dist(oracle, center, v)),
            (false, true) => vol += wt * (r - dist(oracle, center, w)),
            (false, false) => {}
        }
    }
    Ok(vol)
}

/// Volume of a ball when the whole sparsifier is the remainder.
pub fn ball_volume(
    h: &SparsifierGraph,
    oracle: &dyn DistanceOracle,
    center: Vertex,
    members: &[Vertex],
    r: f64,
) -> Result<f64> {
    let remaining = vec![true; h.n()];
    ball_volume_in(h, oracle, &remaining, total_volume(h, oracle), center, members, r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallState {
    pub center: Vertex,
    pub radius: f64,
    /// Sorted.
    pub members: Vec<Vertex>,
    pub boundary: f64,
    pub volume: f64,
    /// Finalised at the fallback radius because the rule never held below 1/3.
    pub safeguarded: bool,
}

/// Grows balls over a fixed sparsifier; `V*` is taken once from the full
/// sparsifier while cuts and volumes only see remaining edges.
pub struct BallGrower<'a> {
    oracle: &'a dyn DistanceOracle,
    adj: Vec<Vec<(Vertex, f64)>>,
    seed_volume: f64,
    factor: f64,
}

impl<'a> BallGrower<'a> {
    pub fn new(h: &SparsifierGraph, oracle: &'a dyn DistanceOracle) -> Self {
        let n = h.n();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in h.edges() {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        Self {
            oracle,
            adj,
            seed_volume: if n == 0 { 0.0 } else { total_volume(h, oracle) / n as f64 },
            factor: stopping_factor(n),
        }
    }

    pub fn grow(&self, remaining: &[bool], center: Vertex) -> BallState {
        let o = self.oracle;
        let mut order: Vec<(f64, Vertex)> = (0..remaining.len())
            .filter(|&v| remaining[v])
            .map(|v| (if v == center { 0.0 } else { dist(o, center, v) }, v))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut inside = vec![false; remaining.len()];
        let mut boundary = 0.0;
        let mut intra = 0.0;
        // Σ w·d(center, v) over cut edges with v inside; vol = seed + intra + ∂r - offset.
        let mut offset = 0.0;
        let mut i = 0;
        let mut members = Vec::new();
        let vol_at = |intra: f64, boundary: f64, offset: f64, r: f64| {
            self.seed_volume + intra + boundary * r - offset
        };
        loop {
            let r0 = order[i].0;
            if r0 >= 1.0 / 3.0 {
                return self.safeguard(center, members, boundary, intra, offset);
            }
            while i < order.len() && order[i].0 == r0 {
                let (dx, x) = order[i];
                inside[x] = true;
                members.push(x);
                for &(y, w) in &self.adj[x] {
                    if !remaining[y] {
                        continue;
                    }
                    if inside[y] {
                        boundary -= w;
                        offset -= w * dist(o, center, y);
                        intra += w * dist(o, x, y);
                    } else {
                        boundary += w;
                        offset += w * dx;
                    }
                }
                i += 1;
            }
            let next = order.get(i).map_or(f64::INFINITY, |e| e.0);
            if boundary <= self.factor * vol_at(intra, boundary, offset, r0) {
                return self.state(center, members, r0, boundary, intra, offset, false);
            }
            if boundary > 0.0 {
                let r = (boundary / self.factor - self.seed_volume - intra + offset) / boundary + 1e-12;
                if r < next && r < 1.0 / 3.0 {
                    let r = r.max(r0);
                    return self.state(center, members, r, boundary, intra, offset, false);
                }
            }
            if i == order.len() {
                return self.safeguard(center, members, boundary, intra, offset);
            }
        }
    }

    fn safeguard(&self, center: Vertex, members: Vec<Vertex>, boundary: f64, intra: f64, offset: f64) -> BallState {
        self.state(center, members, SAFEGUARD_RADIUS, boundary, intra, offset, true)
    }

    #[allow(clippy::too_many_arguments)]
    fn state(
        &self,
        center: Vertex,
        mut members: Vec<Vertex>,
        radius: f64,
        boundary: f64,
        intra: f64,
        offset: f64,
        safeguarded: bool,
    ) -> BallState {
        members.sort_unstable();
        BallState {
            center,
            radius,
            members,
            boundary: boundary.max(0.0),
            volume: self.seed_volume + intra + boundary * radius - offset,
            safeguarded,
        }
    }

    /// Peel balls around the lowest remaining vertex until nothing is left.
    pub fn run(&self) -> BallGrowth {
        let n = self.adj.len();
        let mut remaining = vec![true; n];
        let mut labels = vec![0; n];
        let mut balls = Vec::new();
        for center in 0..n {
            if !remaining[center] {
                continue;
            }
            let ball = self.grow(&remaining, center);
            for &v in &ball.members {
                remaining[v] = false;
                labels[v] = center;
            }
            balls.push(ball);
        }
        let safeguarded = balls.iter().filter(|b| b.safeguarded).count();
        if safeguarded > 0 {
            log::warn!("{safeguarded} balls hit the radius safeguard; predictions violate the triangle inequality");
        }
        BallGrowth {
            clustering: Clustering::from_labels(labels),
            balls,
            safeguarded,
        }
    }
}

pub fn grow_ball(
    h: &SparsifierGraph,
    oracle: &dyn DistanceOracle,
    remaining: &[bool],
    center: Vertex,
) -> Result<BallState> {
    if center >= h.n() || !remaining[center] {
        return Err(Error::Contract(format!("center {center} is not a remaining vertex")));
    }
    Ok(BallGrower::new(h, oracle).grow(remaining, center))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallGrowth {
    pub clustering: Clustering,
    /// In peeling order.
    pub balls: Vec<BallState>,
    pub safeguarded: usize,
}

pub fn ball_growing(h: &SparsifierGraph, oracle: &dyn DistanceOracle) -> BallGrowth {
    BallGrower::new(h, oracle).run()
}

/// What to do when every negative edge fit in the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    BallGrow,
    Singletons,
}

impl std::str::FromStr for Fallback {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ballgrow" => Ok(Self::BallGrow),
            "singletons" => Ok(Self::Singletons),
            _ => Err(Error::Config(format!("unknown fallback {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneralBranch {
    /// Negatives fit in the budget; the fallback strategy ran.
    StoredNegatives,
    /// Negative storage overflowed; ball growing ran.
    BallGrowing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralParams {
    pub epsilon: f64,
    /// Words for stored negatives (two per edge); `None` means
    /// `16 ε⁻² n ⌈log₂ n⌉`.
    pub neg_budget_words: Option<usize>,
    pub fallback: Fallback,
    pub sparsifier: SparsifierParams,
}

impl Default for GeneralParams {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            neg_budget_words: None,
            fallback: Fallback::BallGrow,
            sparsifier: SparsifierParams::sampled(0.2),
        }
    }
}

pub fn default_neg_budget(n: usize, epsilon: f64) -> usize {
    let log2 = (n.max(2) as f64).log2().ceil();
    (16.0 / (epsilon * epsilon) * n as f64 * log2).ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallRecord {
    pub center: Vertex,
    pub radius: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralReport {
    pub branch: GeneralBranch,
    pub fallback: Option<Fallback>,
    pub n: usize,
    /// Peak words of sparsifier state plus stored negatives.
    pub words_peak: usize,
    pub neg_words_peak: usize,
    pub neg_budget_words: usize,
    /// Words of the replay-built sparsifier for dynamic streams, kept apart
    /// from `words_peak`.
    pub concession_words: usize,
    pub sparsifier_edges: usize,
    pub stored_negatives: usize,
    pub balls: Vec<BallRecord>,
    pub safeguarded: usize,
    pub total_volume: f64,
    pub adapted_quality: f64,
    pub runtime_ms: f64,
}

pub fn general_cc(
    stream: &Stream,
    oracle: &dyn DistanceOracle,
    params: &GeneralParams,
    seed: u64,
) -> Result<(Clustering, GeneralReport)> {
    let start = Instant::now();
    let n = stream.n;
    if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon must be in (0, 1), got {}", params.epsilon)));
    }
    let budget = params
        .neg_budget_words
        .unwrap_or_else(|| default_neg_budget(n, params.epsilon));
    let dynamic = stream.has_deletions();
    let mut meter = SpaceMeter::new();
    let mut negatives: HashMap<(Vertex, Vertex), i64> = HashMap::new();
    let mut overflow = false;
    let mut neg_words_peak = 0;
    let mut builder = if dynamic {
        None
    } else {
        Some(SparsifierBuilder::new(n, params.sparsifier, seed)?)
    };
    for up in &stream.updates {
        if up.u >= n || up.v >= n || up.u == up.v {
            return Err(Error::StreamIntegrity(format!("bad update ({}, {})", up.u, up.v)));
        }
        match up.sign {
            Sign::Positive => {
                if let Some(b) = builder.as_mut() {
                    b.push(up)?;
                }
            }
            Sign::Negative if !overflow => {
                let key = pair(up.u, up.v);
                let entry = negatives.entry(key).or_insert(0);
                *entry += up.delta.as_i64();
                if *entry < 0 {
                    return Err(Error::StreamIntegrity(format!("negative edge {key:?} deleted before insertion")));
                }
                if *entry == 0 && up.delta == Delta::Delete {
                    negatives.remove(&key);
                }
                if 2 * negatives.len() > budget {
                    overflow = true;
                    negatives = HashMap::new();
                }
            }
            Sign::Negative => {}
        }
        neg_words_peak = neg_words_peak.max(2 * negatives.len());
        let sparsifier_words = builder.as_ref().map_or(0, SparsifierBuilder::words);
        meter.set(2 * negatives.len() + sparsifier_words);
    }
    let (h, concession_words) = match builder {
        Some(b) => (b.finish(), 0),
        None => {
            let g = replay(stream)?;
            let mut b = SparsifierBuilder::new(n, params.sparsifier, seed)?;
            for (u, v) in g.pos_edges() {
                b.insert(u, v);
            }
            let h = b.finish();
            let words = h.words();
            (h, words)
        }
    };
    meter.set(2 * negatives.len() + if dynamic { 0 } else { h.words() });

    let stored_negatives = negatives.len();
    let (branch, fallback, growth) = if overflow {
        (GeneralBranch::BallGrowing, None, Some(ball_growing(&h, oracle)))
    } else {
        match params.fallback {
            Fallback::BallGrow => (GeneralBranch::StoredNegatives, Some(Fallback::BallGrow), Some(ball_growing(&h, oracle))),
            Fallback::Singletons => (GeneralBranch::StoredNegatives, Some(Fallback::Singletons), None),
        }
    };
    let neg_keys: Vec<(Vertex, Vertex)> = negatives.keys().copied().collect();
    let adapted_quality = adapted_quality_l(&h, neg_keys, oracle);
    let (clustering, balls, safeguarded) = match growth {
        Some(g) => {
            let records = g
                .balls
                .iter()
                .map(|b| BallRecord {
                    center: b.center,
                    radius: b.radius,
                    size: b.members.len(),
                })
                .collect();
            (g.clustering, records, g.safeguarded)
        }
        None => (Clustering::singletons(n), Vec::new(), 0),
    };
    let report = GeneralReport {
        branch,
        fallback,
        n,
        words_peak: meter.peak(),
        neg_words_peak,
        neg_budget_words: budget,
        concession_words,
        sparsifier_edges: h.len(),
        stored_negatives,
        balls,
        safeguarded,
        total_volume: total_volume(&h, oracle),
        adapted_quality,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((clustering, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cost, to_stream, EdgeUpdate, SignedGraph, StreamMode};
    use crate::predictor::{ConstantOracle, TableOracle};

    fn path_instance() -> (SparsifierGraph, TableOracle) {
        let h = SparsifierGraph::from_edges(3, vec![(0, 1, 1.0), (1, 2, 1.0)], 0.0).unwrap();
        let mut o = TableOracle::new(1.0);
        o.set(0, 1, 0.1);
        o.set(1, 2, 0.1);
        o.set(0, 2, 0.2);
        (h, o)
    }

    #[test]
    fn volume_examples() {
        let (h, o) = path_instance();
        let v0 = ball_volume(&h, &o, 0, &[0], 0.0).unwrap();
        assert!((v0 - 0.2 / 3.0).abs() < 1e-12);
        let v1 = ball_volume(&h, &o, 0, &[0, 1], 0.1).unwrap();
        assert!((v1 - (0.2 / 3.0 + 0.1)).abs() < 1e-12);
        assert!(ball_volume(&h, &o, 0, &[0, 2], 0.1).is_err());
        let empty = SparsifierGraph::from_edges(3, vec![], 0.0).unwrap();
        assert_eq!(ball_volume(&empty, &o, 0, &[0], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn grow_on_path() {
        let (h, o) = path_instance();
        let b = grow_ball(&h, &o, &[true; 3], 0).unwrap();
        assert_eq!(b.members, vec![0, 1]);
        let expect = 1.0 / stopping_factor(3) - 0.2 / 3.0;
        assert!((b.radius - expect).abs() < 1e-9, "{}", b.radius);
        assert!((b.radius - 0.17378).abs() < 1e-4);
        // Bisection on the closed-form volume agrees.
        let (mut lo, mut hi) = (0.1, 0.2);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let vol = ball_volume(&h, &o, 0, &[0, 1], mid).unwrap();
            if 1.0 <= stopping_factor(3) * vol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((hi - b.radius).abs() < 1e-9);
        assert!(!b.safeguarded);
    }

    #[test]
    fn isolated_center() {
        let (h, o) = path_instance();
        let b = grow_ball(&h, &o, &[true, false, true], 0).unwrap();
        assert_eq!((b.members.clone(), b.radius), (vec![0], 0.0));
        assert!(grow_ball(&h, &o, &[false, true, true], 0).is_err());
    }

    #[test]
    fn star_is_absorbed_when_cut_vanishes() {
        let h = SparsifierGraph::from_edges(6, (1..6).map(|v| (0, v, 1.0)).collect(), 0.0).unwrap();
        let mut o = TableOracle::new(0.02);
        for v in 1..6 {
            o.set(0, v, 0.01);
        }
        let b = grow_ball(&h, &o, &[true; 6], 0).unwrap();
        assert_eq!(b.members, (0..6).collect::<Vec<_>>());
        assert_eq!(b.radius, 0.01);
        assert_eq!(b.boundary, 0.0);
    }

    #[test]
    fn non_metric_oracle_hits_safeguard() {
        // d(0,2) = 1 > d(0,1) + d(1,2); the heavy edge 1-2 keeps the cut large.
        let h = SparsifierGraph::from_edges(3, vec![(0, 1, 1.0), (1, 2, 100.0)], 0.0).unwrap();
        let mut o = TableOracle::new(1.0);
        o.set(0, 1, 0.1);
        o.set(1, 2, 0.0);
        o.set(0, 2, 1.0);
        let g = ball_growing(&h, &o);
        assert_eq!(g.safeguarded, 1);
        assert_eq!(g.balls[0].radius, SAFEGUARD_RADIUS);
        assert_eq!(g.balls[0].members, vec![0, 1]);
        assert_eq!(g.clustering, Clustering::from_labels([0, 0, 1]));
    }

    fn path_graph() -> SignedGraph {
        SignedGraph::new(3, vec![(0, 1), (1, 2)], vec![(0, 2)], false).unwrap()
    }

    #[test]
    fn end_to_end_on_path() {
        let g = path_graph();
        let (_, o) = path_instance();
        let stream = to_stream(&g, StreamMode::InsertionOnly, 0.0, 1).unwrap();
        let params = GeneralParams {
            neg_budget_words: Some(0),
            sparsifier: SparsifierParams::exact(),
            ..GeneralParams::default()
        };
        let (c, report) = general_cc(&stream, &o, &params, 3).unwrap();
        assert_eq!(report.branch, GeneralBranch::BallGrowing);
        assert_eq!(c, Clustering::from_labels([0, 0, 1]));
        assert_eq!(cost(&g, &c).unwrap(), 1);
        assert_eq!(crate::graph::brute_force_opt(&g).unwrap().0, 1);
        assert_eq!(report.balls.len(), 2);
    }

    #[test]
    fn fallbacks() {
        let g = path_graph();
        let (_, o) = path_instance();
        // Every pair is an edge, so churn adds nothing; delete by hand.
        let mut stream = to_stream(&g, StreamMode::Dynamic, 1.0, 1).unwrap();
        stream.updates.push(EdgeUpdate::insert(0, 2, Sign::Negative));
        stream.updates.push(EdgeUpdate::delete(0, 2, Sign::Negative));
        assert!(stream.has_deletions());
        let mut params = GeneralParams::default();
        let (c, report) = general_cc(&stream, &o, &params, 3).unwrap();
        assert_eq!(report.branch, GeneralBranch::StoredNegatives);
        assert_eq!(report.stored_negatives, 1);
        assert!(report.concession_words > 0);
        assert_eq!(c, Clustering::from_labels([0, 0, 1]));
        params.fallback = Fallback::Singletons;
        let (c, _) = general_cc(&stream, &o, &params, 3).unwrap();
        assert_eq!(c, Clustering::singletons(3));
    }

    #[test]
    fn no_negatives_costs_only_crossing_positives() {
        let g = SignedGraph::new(5, vec![(0, 1), (1, 2), (3, 4)], vec![], false).unwrap();
        let stream = to_stream(&g, StreamMode::InsertionOnly, 0.0, 0).unwrap();
        let o = ConstantOracle::new(0.5).unwrap();
        let params = GeneralParams {
            neg_budget_words: Some(0),
            sparsifier: SparsifierParams::exact(),
            ..GeneralParams::default()
        };
        let (c, _) = general_cc(&stream, &o, &params, 0).unwrap();
        let crossing = g.pos_edges().filter(|&(u, v)| !c.same_cluster(u, v)).count() as u64;
        assert_eq!(cost(&g, &c).unwrap(), crossing);
    }

    #[test]
    fn default_budget_shape() {
        assert_eq!(default_neg_budget(8, 0.5), 16 * 4 * 8 * 3);
        assert!("ballgrow".parse::<Fallback>().is_ok());
        assert!("lp".parse::<Fallback>().is_err());
    }
}
