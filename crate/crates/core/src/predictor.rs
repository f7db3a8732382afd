//! Pairwise distance oracles, the rounding functions that turn distances into
//! join probabilities, and predictor quality metrics.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{pair, Clustering, Sign, SignedGraph, Vertex};
use crate::rng;
use crate::sketch::SparsifierGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Noisy,
    Embedding,
    Table,
    Constant,
}

/// Queryable distance in `[0, 1]`; symmetric with zero diagonal.
pub trait DistanceOracle: Send + Sync {
    fn distance(&self, u: Vertex, v: Vertex) -> f64;
    fn kind(&self) -> OracleKind;
}

impl<T: DistanceOracle + ?Sized> DistanceOracle for Box<T> {
    fn distance(&self, u: Vertex, v: Vertex) -> f64 {
        (**self).distance(u, v)
    }
    fn kind(&self) -> OracleKind {
        (**self).kind()
    }
}

impl<T: DistanceOracle + ?Sized> DistanceOracle for &T {
    fn distance(&self, u: Vertex, v: Vertex) -> f64 {
        (**self).distance(u, v)
    }
    fn kind(&self) -> OracleKind {
        (**self).kind()
    }
}

/// Perturbation of a reference clustering: `eps0` inside a cluster and
/// `1 - eps0` across clusters.
#[derive(Debug, Clone)]
pub struct NoisyOracle {
    labels: Vec<usize>,
    eps0: f64,
}

pub fn noisy_oracle(reference: &Clustering, eps0: f64) -> Result<NoisyOracle> {
    if !(0.0..0.5).contains(&eps0) {
        return Err(Error::Parameter(format!("eps0 must be in [0, 0.5), got {eps0}")));
    }
    Ok(NoisyOracle {
        labels: reference.labels().to_vec(),
        eps0,
    })
}

impl DistanceOracle for NoisyOracle {
    fn distance(&self, u: Vertex, v: Vertex) -> f64 {
        if u == v {
            0.0
        } else if self.labels[u] == self.labels[v] {
            self.eps0
        } else {
            1.0 - self.eps0
        }
    }
    fn kind(&self) -> OracleKind {
        OracleKind::Noisy
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if let Some((u, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != dim) {
            return Err(Error::Parameter(format!(
                "vector of vertex {u} has length {}, expected {dim}",
                v.len()
            )));
        }
        Ok(Self { dim, vectors })
    }

    /// Lines `u x1 … xd`. Vertex labels are resolved through `index` when
    /// given, otherwise parsed as dense integer ids.
    pub fn load(path: &Path, n: usize, index: Option<&HashMap<String, Vertex>>) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut vectors: Vec<Option<Vec<f64>>> = vec![None; n];
        for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let name = fields.next().expect("non-empty line");
            let u = resolve(name, n, index).ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("unknown vertex {name:?}"),
            })?;
            let xs = fields
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: lineno,
                    msg: e.to_string(),
                })?;
            vectors[u] = Some(xs);
        }
        let vectors = vectors
            .into_iter()
            .enumerate()
            .map(|(u, v)| {
                v.ok_or_else(|| Error::Parameter(format!("no embedding for vertex {u}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn resolve(name: &str, n: usize, index: Option<&HashMap<String, Vertex>>) -> Option<Vertex> {
    match index {
        Some(map) => map.get(name).copied(),
        None => name.parse::<usize>().ok().filter(|&u| u < n),
    }
}

/// Cosine distance `1 - <x_u, x_v> / (|x_u| |x_v|)`, clamped to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct EmbeddingOracle {
    unit: Vec<Vec<f64>>,
}

pub fn embedding_oracle(table: &EmbeddingTable) -> Result<EmbeddingOracle> {
    let unit = table
        .vectors
        .iter()
        .enumerate()
        .map(|(u, x)| {
            let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                Err(Error::Parameter(format!("zero or non-finite embedding for vertex {u}")))
            } else {
                Ok(x.iter().map(|a| a / norm).collect())
            }
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(EmbeddingOracle { unit })
}

impl DistanceOracle for EmbeddingOracle {
    fn distance(&self, u: Vertex, v: Vertex) -> f64 {
        if u == v {
            return 0.0;
        }
        let dot: f64 = self.unit[u].iter().zip(&self.unit[v]).map(|(a, b)| a * b).sum();
        (1.0 - dot).clamp(0.0, 1.0)
    }
    fn kind(&self) -> OracleKind {
        OracleKind::Embedding
    }
}

/// Sparse distance table; unlisted pairs read as `default` (1 unless set).
#[derive(Debug, Clone)]
pub struct TableOracle {
    entries: HashMap<(Vertex, Vertex), f64>,
    default: f64,
    clamped: usize,
}

impl TableOracle {
    pub fn new(default: f64) -> Self {
        Self {
            entries: HashMap::new(),
            default: default.clamp(0.0, 1.0),
            clamped: 0,
        }
    }

    /// Set a distance, clamping into `[0, 1]`. Self pairs are ignored.
    pub fn set(&mut self, u: Vertex, v: Vertex, d: f64) {
        if u == v {
            return;
        }
        let c = if d.is_nan() { 1.0 } else { d.clamp(0.0, 1.0) };
        if c != d {
            self.clamped += 1;
        }
        self.entries.insert(pair(u, v), c);
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(Vertex, Vertex) -> f64) -> Self {
        let mut t = Self::new(1.0);
        for u in 0..n {
            for v in u + 1..n {
                t.set(u, v, f(u, v));
            }
        }
        t
    }

    /// Distance 0 on positive pairs of `g`, 1 elsewhere.
    pub fn indicator_of_graph(g: &SignedGraph) -> Self {
        let mut t = Self::new(1.0);
        for (u, v) in g.pos_edges() {
            t.set(u, v, 0.0);
        }
        t
    }

    /// Lines `u v d`.
    pub fn load(path: &Path, n: usize, index: Option<&HashMap<String, Vertex>>) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut t = Self::new(1.0);
        for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected `u v d`, got {line:?}"),
                });
            }
            let lookup = |name: &str| {
                resolve(name, n, index).ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: format!("unknown vertex {name:?}"),
                })
            };
            let u = lookup(f[0])?;
            let v = lookup(f[1])?;
            let d: f64 = f[2].parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad distance {:?}", f[2]),
            })?;
            t.set(u, v, d);
        }
        if t.clamped > 0 {
            log::warn!("{}: clamped {} distances into [0, 1]", path.display(), t.clamped);
        }
        Ok(t)
    }

    /// Number of values clamped into `[0, 1]` on insertion.
    pub fn clamped(&self) -> usize {
        self.clamped
    }
}

impl DistanceOracle for TableOracle {
    fn distance(&self, u: Vertex, v: Vertex) -> f64 {
        if u == v {
            return 0.0;
        }
        self.entries.get(&pair(u, v)).copied().unwrap_or(self.default)
    }
    fn kind(&self) -> OracleKind {
        OracleKind::Table
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantOracle(f64);

impl ConstantOracle {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Domain { value });
        }
        Ok(Self(value))
    }
}

impl DistanceOracle for ConstantOracle {
    fn distance(&self, u: Vertex, v: Vertex) -> f64 {
        if u == v {
            0.0
        } else {
            self.0
        }
    }
    fn kind(&self) -> OracleKind {
        OracleKind::Constant
    }
}

/// Breakpoints of the positive rounding function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingParams {
    pub a: f64,
    pub b: f64,
}

impl Default for RoundingParams {
    fn default() -> Self {
        Self { a: 0.19, b: 0.5095 }
    }
}

impl RoundingParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(0.0 < a && a < b && b < 1.0) {
            return Err(Error::Parameter(format!("need 0 < a < b < 1, got a={a}, b={b}")));
        }
        Ok(Self { a, b })
    }

    /// Probability of keeping the pair apart; `d` is assumed in `[0, 1]`.
    #[inline]
    pub fn prob(&self, sign: Sign, d: f64) -> f64 {
        match sign {
            Sign::Negative => d,
            Sign::Positive => {
                if d < self.a {
                    0.0
                } else if d > self.b {
                    1.0
                } else {
                    let t = (d - self.a) / (self.b - self.a);
                    t * t
                }
            }
        }
    }

    /// Probability of putting the pair together, `1 - p_uv`.
    #[inline]
    pub fn join_prob(&self, sign: Sign, d: f64) -> f64 {
        1.0 - self.prob(sign, d)
    }
}

pub fn round_probability(sign: Sign, d: f64, params: &RoundingParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&d) {
        return Err(Error::Domain { value: d });
    }
    Ok(params.prob(sign, d))
}

/// `Σ_{E+} d + Σ_{E-} (1 - d)`, implicit negatives included.
pub fn quality_l(g: &SignedGraph, o: &dyn DistanceOracle) -> f64 {
    let pos: f64 = g.pos_edges().map(|(u, v)| o.distance(u, v)).sum();
    let neg: f64 = g.all_neg_edges().map(|(u, v)| 1.0 - o.distance(u, v)).sum();
    pos + neg
}

/// Same objective with positive terms weighted by a sparsifier.
pub fn adapted_quality_l(
    h: &SparsifierGraph,
    neg_edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    o: &dyn DistanceOracle,
) -> f64 {
    let pos: f64 = h.edges().iter().map(|&(u, v, w)| w * o.distance(u, v)).sum();
    let neg: f64 = neg_edges.into_iter().map(|(u, v)| 1.0 - o.distance(u, v)).sum();
    pos + neg
}

/// Count triples violating the triangle inequality beyond `1e-9`.
///
/// With `sample_size == 0`, or at least as many samples as there are
/// triples, every unordered triple is checked once; otherwise triples are
/// drawn uniformly with replacement. A triple counts once if any of its three
/// orientations violates the inequality.
pub fn triangle_violation_count(
    o: &dyn DistanceOracle,
    vertices: &[Vertex],
    sample_size: usize,
    seed: u64,
) -> usize {
    let k = vertices.len();
    if k < 3 {
        return 0;
    }
    let violates = |a: Vertex, b: Vertex, c: Vertex| {
        let ab = o.distance(a, b);
        let bc = o.distance(b, c);
        let ac = o.distance(a, c);
        ab + bc < ac - 1e-9 || ab + ac < bc - 1e-9 || ac + bc < ab - 1e-9
    };
    let triples = (k as u128) * (k as u128 - 1) * (k as u128 - 2) / 6;
    if sample_size == 0 || sample_size as u128 >= triples {
        let mut count = 0;
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    if violates(vertices[i], vertices[j], vertices[l]) {
                        count += 1;
                    }
                }
            }
        }
        return count;
    }
    let mut rng = rng::rng_from(seed);
    let mut count = 0;
    for _ in 0..sample_size {
        let i = rng.gen_range(0..k);
        let mut j = rng.gen_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        let mut l = rng.gen_range(0..k - 2);
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        if l >= lo {
            l += 1;
        }
        if l >= hi {
            l += 1;
        }
        if violates(vertices[i], vertices[j], vertices[l]) {
            count += 1;
        }
    }
    count
}

/// How a predictor is chosen on the command line and in experiment configs:
/// `noisy:<eps0>`, `embed:<path>`, `table:<path>` or `const:<value>`.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictorSpec {
    Noisy(f64),
    Embedding(PathBuf),
    Table(PathBuf),
    Constant(f64),
}

impl FromStr for PredictorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("predictor {s:?} is not `kind:arg`")))?;
        let num = |a: &str| {
            a.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number {a:?} in predictor {s:?}")))
        };
        match kind {
            "noisy" => Ok(Self::Noisy(num(arg)?)),
            "embed" => Ok(Self::Embedding(PathBuf::from(arg))),
            "table" => Ok(Self::Table(PathBuf::from(arg))),
            "const" => Ok(Self::Constant(num(arg)?)),
            _ => Err(Error::Config(format!("unknown predictor kind {kind:?}"))),
        }
    }
}

impl fmt::Display for PredictorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Noisy(e) => write!(f, "noisy:{e}"),
            Self::Embedding(p) => write!(f, "embed:{}", p.display()),
            Self::Table(p) => write!(f, "table:{}", p.display()),
            Self::Constant(c) => write!(f, "const:{c}"),
        }
    }
}

impl PredictorSpec {
    /// Build the oracle. `reference` is required for noisy predictors; `index`
    /// maps file labels to dense ids for file-backed predictors.
    pub fn build(
        &self,
        n: usize,
        reference: Option<&Clustering>,
        index: Option<&HashMap<String, Vertex>>,
    ) -> Result<Box<dyn DistanceOracle>> {
        Ok(match self {
            Self::Noisy(eps0) => {
                let reference = reference.ok_or_else(|| {
                    Error::Config("noisy predictor needs a reference clustering".into())
                })?;
                Box::new(noisy_oracle(reference, *eps0)?)
            }
            Self::Embedding(p) => Box::new(embedding_oracle(&EmbeddingTable::load(p, n, index)?)?),
            Self::Table(p) => Box::new(TableOracle::load(p, n, index)?),
            Self::Constant(c) => Box::new(ConstantOracle::new(*c)?),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            Self::Embedding(p) | Self::Table(p) => Some(p),
            _ => None,
        }
    }
}
