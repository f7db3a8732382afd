use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::Path;

use super::stream::parse_sign;
use super::{pair, Sign, SignedGraph, Vertex};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// Signed if any line carries a third column, otherwise unsigned.
    #[default]
    Auto,
    /// Listed edges are positive and the instance is complete.
    Unsigned,
    /// Every line must carry `+` or `-`; unlisted pairs are neutral.
    Signed,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeListOptions {
    /// Input lines are arcs; `u v` and `v u` collapse to one undirected edge.
    pub directed: bool,
    pub signs: SignConvention,
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: SignedGraph,
    /// `names[id]` is the label used for dense id `id` in the file.
    pub names: Vec<String>,
    pub merged_duplicates: usize,
    pub dropped_self_loops: usize,
}

impl LoadedGraph {
    pub fn index(&self) -> HashMap<String, Vertex> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect()
    }
}

pub fn load_edge_list(path: &Path, opts: EdgeListOptions) -> Result<LoadedGraph> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(std::io::BufReader::new(file), opts).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub(crate) fn parse_edge_list(reader: impl BufRead, opts: EdgeListOptions) -> Result<LoadedGraph> {
    let mut ids: HashMap<String, Vertex> = HashMap::new();
    let mut names = Vec::new();
    let mut edges: BTreeMap<(Vertex, Vertex), (Sign, usize)> = BTreeMap::new();
    let mut any_signed = false;
    let mut merged = 0;
    let mut self_loops = 0;

    let mut intern = |name: &str| -> Vertex {
        if let Some(&id) = ids.get(name) {
            return id;
        }
        let id = names.len();
        names.push(name.to_string());
        ids.insert(name.to_string(), id);
        id
    };

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io("<edge list>", e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let sign = match (fields.len(), opts.signs) {
            (2, SignConvention::Signed) => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "missing sign column".into(),
                })
            }
            (2, _) => Sign::Positive,
            (3, SignConvention::Unsigned) => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "unexpected third column in an unsigned edge list".into(),
                })
            }
            (3, _) => {
                any_signed = true;
                parse_sign(fields[2]).ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: format!("bad sign {:?}", fields[2]),
                })?
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected `u v` or `u v s`, got {line:?}"),
                })
            }
        };
        let u = intern(fields[0]);
        let v = intern(fields[1]);
        if u == v {
            self_loops += 1;
            continue;
        }
        match edges.get(&pair(u, v)) {
            Some(&(prev, first_line)) if prev != sign => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!(
                        "pair ({}, {}) listed with both signs (first on line {first_line})",
                        fields[0], fields[1]
                    ),
                })
            }
            Some(_) => merged += 1,
            None => {
                edges.insert(pair(u, v), (sign, lineno));
            }
        }
    }

    let signed = match opts.signs {
        SignConvention::Auto => any_signed,
        SignConvention::Unsigned => false,
        SignConvention::Signed => true,
    };
    let n = names.len();
    let pos = edges
        .iter()
        .filter(|(_, (s, _))| *s == Sign::Positive)
        .map(|(&e, _)| e);
    let neg = edges
        .iter()
        .filter(|(_, (s, _))| *s == Sign::Negative)
        .map(|(&e, _)| e);
    let graph = SignedGraph::new(n, pos, neg, !signed)?;
    if opts.directed {
        log::debug!("merged {merged} reciprocal/duplicate arcs");
    }
    Ok(LoadedGraph {
        graph,
        names,
        merged_duplicates: merged,
        dropped_self_loops: self_loops,
    })
}
