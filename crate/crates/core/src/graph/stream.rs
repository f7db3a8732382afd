use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{pair, Sign, SignedGraph, Vertex};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Delta {
    Insert,
    Delete,
}

impl Delta {
    pub fn as_i64(self) -> i64 {
        match self {
            Delta::Insert => 1,
            Delta::Delete => -1,
        }
    }
}

/// One stream item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeUpdate {
    pub u: Vertex,
    pub v: Vertex,
    pub sign: Sign,
    pub delta: Delta,
}

impl EdgeUpdate {
    pub fn insert(u: Vertex, v: Vertex, sign: Sign) -> Self {
        Self {
            u,
            v,
            sign,
            delta: Delta::Insert,
        }
    }

    pub fn delete(u: Vertex, v: Vertex, sign: Sign) -> Self {
        Self {
            u,
            v,
            sign,
            delta: Delta::Delete,
        }
    }
}

/// A graph stream together with the vertex count and instance kind it
/// describes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    pub n: usize,
    pub complete: bool,
    pub updates: Vec<EdgeUpdate>,
}

impl Stream {
    pub fn has_deletions(&self) -> bool {
        self.updates.iter().any(|e| e.delta == Delta::Delete)
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    InsertionOnly,
    Dynamic,
}

/// Materialise `g` as a stream of its explicit edges.
///
/// Dynamic mode additionally interleaves `round(churn * m)` insert/delete pairs
/// of decoy edges drawn from the non-edges of `g`, so the net result is still
/// exactly `g`.
pub fn to_stream(g: &SignedGraph, mode: StreamMode, churn: f64, seed: u64) -> Result<Stream> {
    if !(churn >= 0.0) {
        return Err(Error::Parameter(format!("churn must be >= 0, got {churn}")));
    }
    let mut rng = rng::rng_from(seed);
    let real: Vec<EdgeUpdate> = g
        .pos_edges()
        .map(|(u, v)| EdgeUpdate::insert(u, v, Sign::Positive))
        .chain(
            g.neg_edges()
                .map(|(u, v)| EdgeUpdate::insert(u, v, Sign::Negative)),
        )
        .collect();

    let decoys = match mode {
        StreamMode::InsertionOnly => Vec::new(),
        StreamMode::Dynamic => {
            let want = (churn * real.len() as f64).round() as usize;
            sample_decoys(g, want, &mut rng)
        }
    };

    #[derive(Clone, Copy)]
    enum Token {
        Real(usize),
        Decoy(usize),
    }
    let mut tokens: Vec<Token> = (0..real.len()).map(Token::Real).collect();
    for i in 0..decoys.len() {
        tokens.push(Token::Decoy(i));
        tokens.push(Token::Decoy(i));
    }
    tokens.shuffle(&mut rng);

    let mut opened = vec![false; decoys.len()];
    let updates = tokens
        .into_iter()
        .map(|t| match t {
            Token::Real(i) => {
                let mut e = real[i];
                if rng.gen_bool(0.5) {
                    std::mem::swap(&mut e.u, &mut e.v);
                }
                e
            }
            Token::Decoy(i) => {
                let (u, v, sign) = decoys[i];
                if opened[i] {
                    EdgeUpdate::delete(u, v, sign)
                } else {
                    opened[i] = true;
                    EdgeUpdate::insert(u, v, sign)
                }
            }
        })
        .collect();
    Ok(Stream {
        n: g.n(),
        complete: g.is_complete(),
        updates,
    })
}

/// Decoys are non-edges of the final graph, sampled without replacement while
/// enough of them exist.
fn sample_decoys(
    g: &SignedGraph,
    want: usize,
    rng: &mut impl Rng,
) -> Vec<(Vertex, Vertex, Sign)> {
    let n = g.n();
    if want == 0 || n < 2 {
        return Vec::new();
    }
    let total_pairs = super::binom2(n) as usize;
    let free = total_pairs - g.num_explicit();
    if free == 0 {
        return Vec::new();
    }
    let decoy_sign = |rng: &mut dyn rand::RngCore| {
        if g.is_complete() || rng.gen_bool(0.5) {
            Sign::Positive
        } else {
            Sign::Negative
        }
    };
    let is_edge = |u: Vertex, v: Vertex| g.is_pos(u, v) || g.neg.contains(&pair(u, v));
    let mut out = Vec::with_capacity(want);
    let mut taken = BTreeSet::new();
    while out.len() < want {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v || is_edge(u, v) {
            continue;
        }
        let e = pair(u, v);
        if taken.len() < free {
            if !taken.insert(e) {
                continue;
            }
        }
        out.push((e.0, e.1, decoy_sign(rng)));
    }
    out
}

/// Insertion-only stream of every pair of a complete instance, negatives
/// included; the insertion-only algorithm needs to see negative pairs.
pub fn to_full_stream(g: &SignedGraph, seed: u64) -> Stream {
    let mut updates: Vec<EdgeUpdate> = Vec::with_capacity(super::binom2(g.n()) as usize);
    for u in 0..g.n() {
        for v in u + 1..g.n() {
            if let Some(sign) = g.sign(u, v) {
                updates.push(EdgeUpdate::insert(u, v, sign));
            }
        }
    }
    updates.shuffle(&mut rng::rng_from(seed));
    Stream {
        n: g.n(),
        complete: g.is_complete(),
        updates,
    }
}

/// Net graph described by a stream.
///
/// Fails if a (pair, sign) multiplicity ever goes negative, ends above one,
/// or a pair ends with both signs. In complete mode surviving negative items
/// are dropped, since negatives are implicit there.
pub fn replay(stream: &Stream) -> Result<SignedGraph> {
    let mut mult: HashMap<((Vertex, Vertex), Sign), i64> = HashMap::new();
    for (i, e) in stream.updates.iter().enumerate() {
        if e.u == e.v || e.u >= stream.n || e.v >= stream.n {
            return Err(Error::StreamIntegrity(format!(
                "item {i}: invalid pair ({}, {}) for n = {}",
                e.u, e.v, stream.n
            )));
        }
        let m = mult.entry((pair(e.u, e.v), e.sign)).or_insert(0);
        *m += e.delta.as_i64();
        if *m < 0 {
            return Err(Error::StreamIntegrity(format!(
                "item {i}: delete of ({}, {}) without a matching insert",
                e.u, e.v
            )));
        }
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for ((e, sign), m) in mult {
        match m {
            0 => {}
            1 => match sign {
                Sign::Positive => pos.push(e),
                Sign::Negative => neg.push(e),
            },
            _ => {
                return Err(Error::StreamIntegrity(format!(
                    "pair {e:?} has net multiplicity {m}"
                )))
            }
        }
    }
    if stream.complete {
        neg.clear();
    }
    SignedGraph::new(stream.n, pos, neg, stream.complete)
        .map_err(|e| Error::StreamIntegrity(e.to_string()))
}

/// Write a stream as `u v s d` lines preceded by a `# n=<n> complete=<0|1>`
/// header comment.
pub fn write_stream(stream: &Stream, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "# n={} complete={}", stream.n, u8::from(stream.complete)).map_err(io)?;
    for e in &stream.updates {
        writeln!(
            w,
            "{} {} {} {:+}",
            e.u,
            e.v,
            e.sign.symbol(),
            e.delta.as_i64()
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_stream(path: &Path) -> Result<Stream> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_stream(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub(crate) fn parse_stream(reader: impl BufRead) -> Result<Stream> {
    let mut n_header = None;
    let mut complete = true;
    let mut updates = Vec::new();
    let mut max_id = None;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io("<stream>", e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for kv in comment.split_whitespace() {
                if let Some(v) = kv.strip_prefix("n=") {
                    n_header = Some(v.parse::<usize>().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("bad vertex count {v:?}"),
                    })?);
                } else if let Some(v) = kv.strip_prefix("complete=") {
                    complete = matches!(v, "1" | "true");
                }
            }
            continue;
        }
        let bad = |msg: String| Error::Parse { line: lineno, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected `u v s d`, got {line:?}")));
        }
        let u: usize = fields[0]
            .parse()
            .map_err(|_| bad(format!("bad vertex {:?}", fields[0])))?;
        let v: usize = fields[1]
            .parse()
            .map_err(|_| bad(format!("bad vertex {:?}", fields[1])))?;
        let sign = parse_sign(fields[2]).ok_or_else(|| bad(format!("bad sign {:?}", fields[2])))?;
        let delta = match fields[3] {
            "+1" | "1" => Delta::Insert,
            "-1" => Delta::Delete,
            other => return Err(bad(format!("bad delta {other:?}"))),
        };
        if u == v {
            return Err(bad(format!("self-loop on {u}")));
        }
        max_id = Some(max_id.unwrap_or(0).max(u).max(v));
        updates.push(EdgeUpdate { u, v, sign, delta });
    }
    let inferred = max_id.map_or(0, |m| m + 1);
    let n = n_header.unwrap_or(inferred);
    if n < inferred {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header n={n} but vertex {} appears", inferred - 1),
        });
    }
    Ok(Stream {
        n,
        complete,
        updates,
    })
}

pub(crate) fn parse_sign(s: &str) -> Option<Sign> {
    match s {
        "+" | "+1" | "1" => Some(Sign::Positive),
        "-" | "-1" => Some(Sign::Negative),
        _ => None,
    }
}
