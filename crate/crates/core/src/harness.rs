//! Experiment orchestration: configs, per-trial runs, replay and summaries.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::ballgrow::{general_cc, Fallback, GeneralParams};
use crate::error::{Error, Result};
use crate::graph::{
    bad_triangle_lower_bound, brute_force_opt, cost, generate_sbm, load_edge_list, replay, to_full_stream,
    to_stream, Clustering, EdgeListOptions, SignedGraph, Stream, StreamMode, Vertex, BRUTE_FORCE_LIMIT,
};
use crate::pivot::{classic_pivot, cklpu_pivot, cm_pivot, Branch, TruncationThresholds};
use crate::predictor::{quality_l, DistanceOracle, PredictorSpec, RoundingParams};
use crate::rng;
use crate::sketch::SparsifierParams;
use crate::streaming::{dynamic_cc, insertion_cc, permutation_for, DynamicParams, InsertionParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algo {
    Dynamic,
    Insertion,
    General,
    Cklpu,
    CmPivot,
    Pivot,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Dynamic => "dynamic",
            Algo::Insertion => "insertion",
            Algo::General => "general",
            Algo::Cklpu => "cklpu",
            Algo::CmPivot => "cm",
            Algo::Pivot => "pivot",
        }
    }

    /// Prediction-free counterpart used for learning/non-learning ratios.
    pub fn baseline(self) -> Option<Algo> {
        match self {
            Algo::Dynamic => Some(Algo::Cklpu),
            Algo::Insertion => Some(Algo::CmPivot),
            _ => None,
        }
    }

    pub fn needs_complete(self) -> bool {
        self != Algo::General
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dynamic" => Algo::Dynamic,
            "insertion" => Algo::Insertion,
            "general" => Algo::General,
            "cklpu" => Algo::Cklpu,
            "cm" => Algo::CmPivot,
            "pivot" => Algo::Pivot,
            _ => return Err(Error::Config(format!("unknown algorithm {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Sbm { n: usize, k: usize, p: f64 },
    EdgeList { path: PathBuf, reference: Option<PathBuf> },
}

impl Dataset {
    pub fn label(&self) -> String {
        match self {
            Dataset::Sbm { n, k, p } => format!("sbm:{n}:{k}:{p}"),
            Dataset::EdgeList { path, .. } => path
                .file_name()
                .map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned()),
        }
    }
}

/// Parameters shared by every algorithm in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoParams {
    pub epsilon: f64,
    pub c: f64,
    pub k: usize,
    pub rounding: RoundingParams,
    pub neg_budget_words: Option<usize>,
    pub fallback: Fallback,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Self {
            epsilon: TruncationThresholds::DEFAULT_EPSILON,
            c: TruncationThresholds::DEFAULT_C,
            k: 10,
            rounding: RoundingParams::default(),
            neg_budget_words: None,
            fallback: Fallback::BallGrow,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: Dataset,
    pub algos: Vec<Algo>,
    pub predictors: Vec<PredictorSpec>,
    pub trials: usize,
    pub seed: u64,
    pub params: AlgoParams,
    /// Decoy insert/delete pairs per real edge in dynamic streams.
    pub churn: f64,
    pub output: Option<PathBuf>,
    /// Record wall-clock runtimes; off by default so output is byte-stable.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: Dataset::Sbm { n: 100, k: 4, p: 0.9 },
            algos: vec![Algo::Dynamic, Algo::Cklpu],
            predictors: vec![PredictorSpec::Noisy(0.0)],
            trials: 1,
            seed: 0,
            params: AlgoParams::default(),
            churn: 0.5,
            output: None,
            timing: false,
        }
    }
}

fn list<T: FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

impl ExperimentConfig {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut reference = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dataset" => cfg.dataset = parse_dataset(value)?,
                "reference" => reference = Some(PathBuf::from(value)),
                "algos" => cfg.algos = list(value)?,
                "predictors" => cfg.predictors = list(value)?,
                "eps0" => cfg.predictors = list::<NoisyLevel>(value)?.into_iter().map(|e| PredictorSpec::Noisy(e.0)).collect(),
                "trials" => cfg.trials = num(key, value)?,
                "seed" => cfg.seed = num(key, value)?,
                "epsilon" => cfg.params.epsilon = num(key, value)?,
                "c" => cfg.params.c = num(key, value)?,
                "k" => cfg.params.k = num(key, value)?,
                "neg_budget" => cfg.params.neg_budget_words = Some(num(key, value)?),
                "fallback" => cfg.params.fallback = value.parse()?,
                "churn" => cfg.churn = num(key, value)?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                "timing" => cfg.timing = num(key, value)?,
                _ => return Err(Error::Config(format!("line {}: unknown key {key:?}", i + 1))),
            }
        }
        if let Some(r) = reference {
            match &mut cfg.dataset {
                Dataset::EdgeList { reference, .. } => *reference = Some(r),
                Dataset::Sbm { .. } => {
                    return Err(Error::Config("reference is only meaningful for edge-list datasets".into()))
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.algos.is_empty() {
            return Err(Error::Config("no algorithms listed".into()));
        }
        if self.predictors.is_empty() {
            return Err(Error::Config("no predictors listed".into()));
        }
        if !(self.churn >= 0.0) {
            return Err(Error::Config(format!("churn must be >= 0, got {}", self.churn)));
        }
        let mut paths: Vec<&Path> = self.predictors.iter().filter_map(PredictorSpec::path).collect();
        match &self.dataset {
            Dataset::Sbm { n, k, p } => {
                if *k == 0 || *k > (*n).max(1) || !(*p > 0.5 && *p <= 1.0) {
                    return Err(Error::Config(format!("bad SBM parameters n={n} k={k} p={p}")));
                }
            }
            Dataset::EdgeList { path, reference } => {
                paths.push(path);
                if let Some(r) = reference {
                    paths.push(r);
                } else if self.predictors.iter().any(|p| matches!(p, PredictorSpec::Noisy(_))) {
                    return Err(Error::Config(
                        "noisy predictors on an edge list need a reference labels file".into(),
                    ));
                }
            }
        }
        for p in paths {
            if !p.exists() {
                return Err(Error::Config(format!("file not found: {}", p.display())));
            }
        }
        TruncationThresholds::new(2, self.params.epsilon, self.params.c)?;
        if self.params.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.params.k)));
        }
        Ok(())
    }
}

struct NoisyLevel(f64);

impl FromStr for NoisyLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        num("eps0", s).map(NoisyLevel)
    }
}

fn parse_dataset(value: &str) -> Result<Dataset> {
    let (kind, rest) = value
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("dataset {value:?} is not kind:args")))?;
    match kind {
        "sbm" => {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Config(format!("expected sbm:n:k:p, got {value:?}")));
            }
            Ok(Dataset::Sbm {
                n: num("n", parts[0])?,
                k: num("k", parts[1])?,
                p: num("p", parts[2])?,
            })
        }
        "edges" => Ok(Dataset::EdgeList {
            path: PathBuf::from(rest),
            reference: None,
        }),
        _ => Err(Error::Config(format!("unknown dataset kind {kind:?}"))),
    }
}

/// Lines `vertex label`; vertices resolve through `index` or as dense ids.
pub fn load_reference(path: &Path, n: usize, index: Option<&HashMap<String, Vertex>>) -> Result<Clustering> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut labels: Vec<Option<String>> = vec![None; n];
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut f = line.split_whitespace();
        let (Some(name), Some(label)) = (f.next(), f.next()) else {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected `vertex label`, got {line:?}"),
            });
        };
        let u = match index {
            Some(m) => m.get(name).copied(),
            None => name.parse::<usize>().ok().filter(|&u| u < n),
        }
        .ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: format!("unknown vertex {name:?}"),
        })?;
        labels[u] = Some(label.to_string());
    }
    let mut ids: HashMap<String, usize> = HashMap::new();
    let dense: Vec<usize> = labels
        .into_iter()
        .enumerate()
        .map(|(u, l)| {
            // Unlabelled vertices get their own cluster.
            let key = l.unwrap_or_else(|| format!("\u{0}{u}"));
            let next = ids.len();
            *ids.entry(key).or_insert(next)
        })
        .collect();
    Ok(Clustering::from_labels(dense))
}

pub fn write_reference(path: &Path, c: &Clustering) -> Result<()> {
    let mut body = String::new();
    for (u, l) in c.labels().iter().enumerate() {
        body.push_str(&format!("{u} {l}\n"));
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Second-pass materialisation of a stream's net graph. Its storage is not
/// part of any algorithm's space.
pub fn replay_oracle(stream: &Stream) -> Result<SignedGraph> {
    replay(stream)
}

/// One algorithm run on one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub clustering: Clustering,
    pub branch: Option<Branch>,
    pub est_cost_first: Option<f64>,
    pub est_cost_second: Option<f64>,
    pub words_peak: usize,
    pub concession_words: usize,
    pub runtime_ms: f64,
}

/// Run `algo` on `stream`. Offline algorithms read the replayed graph.
pub fn run_algorithm(
    algo: Algo,
    stream: &Stream,
    oracle: &dyn DistanceOracle,
    params: &AlgoParams,
    seed: u64,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let offline = |c: Clustering, g: &SignedGraph| RunOutcome {
        clustering: c,
        branch: None,
        est_cost_first: None,
        est_cost_second: None,
        words_peak: 2 * g.num_pos() + 2 * g.n(),
        concession_words: 0,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    match algo {
        Algo::Dynamic => {
            let p = DynamicParams {
                epsilon: params.epsilon,
                c: params.c,
                rounding: params.rounding,
                sparsifier: SparsifierParams::sampled(params.epsilon),
                ..DynamicParams::default()
            };
            let (c, r) = dynamic_cc(stream, oracle, &p, seed)?;
            Ok(RunOutcome {
                clustering: c,
                branch: Some(r.chosen),
                est_cost_first: Some(r.est_cost_first),
                est_cost_second: Some(r.est_cost_second),
                words_peak: r.words_peak,
                concession_words: r.concession_words,
                runtime_ms: r.runtime_ms,
            })
        }
        Algo::Insertion => {
            let p = InsertionParams {
                k: params.k,
                rounding: params.rounding,
                sparsifier: SparsifierParams::sampled(params.epsilon),
                clamp_estimates: false,
            };
            let (c, r) = insertion_cc(stream, oracle, &p, seed)?;
            Ok(RunOutcome {
                clustering: c,
                branch: Some(r.chosen),
                est_cost_first: Some(r.est_cost_first),
                est_cost_second: Some(r.est_cost_second),
                words_peak: r.words_peak,
                concession_words: 0,
                runtime_ms: r.runtime_ms,
            })
        }
        Algo::General => {
            let p = GeneralParams {
                epsilon: params.epsilon,
                neg_budget_words: params.neg_budget_words,
                fallback: params.fallback,
                sparsifier: SparsifierParams::sampled(params.epsilon),
            };
            let (c, r) = general_cc(stream, oracle, &p, seed)?;
            Ok(RunOutcome {
                clustering: c,
                branch: None,
                est_cost_first: None,
                est_cost_second: None,
                words_peak: r.words_peak,
                concession_words: r.concession_words,
                runtime_ms: r.runtime_ms,
            })
        }
        Algo::Cklpu | Algo::CmPivot | Algo::Pivot => {
            let g = replay_oracle(stream)?;
            if !g.is_complete() {
                return Err(Error::UnsupportedMode(format!("{algo} needs a complete instance")));
            }
            let perm = permutation_for(g.n(), seed);
            let c = match algo {
                Algo::Cklpu => {
                    let thr = TruncationThresholds::new(g.n(), params.epsilon, params.c)?;
                    cklpu_pivot(&g, &perm, &thr)?
                }
                Algo::CmPivot => cm_pivot(&g, params.k, &perm)?,
                _ => classic_pivot(&g, &perm)?,
            };
            Ok(offline(c, &g))
        }
    }
}

/// Stream shape each algorithm consumes.
pub fn stream_for(algo: Algo, g: &SignedGraph, churn: f64, seed: u64) -> Result<Stream> {
    match algo {
        Algo::Insertion => Ok(to_full_stream(g, seed)),
        Algo::Dynamic | Algo::General => to_stream(g, StreamMode::Dynamic, churn, seed),
        _ => to_stream(g, StreamMode::InsertionOnly, 0.0, seed),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub algo: Algo,
    pub predictor: String,
    /// `L / OPT` when OPT is computable, otherwise `L`.
    pub beta_measured: f64,
    pub trial: usize,
    /// Absent when the trial failed.
    pub cost: Option<u64>,
    pub opt_or_lowerbound: u64,
    pub words_peak: usize,
    pub runtime_ms: f64,
    pub branch: Option<Branch>,
    pub quality_l: f64,
    pub opt_exact: bool,
    pub est_cost_first: Option<f64>,
    pub est_cost_second: Option<f64>,
    pub concession_words: usize,
    pub error: Option<String>,
}

pub const ROW_HEADER: [&str; 16] = [
    "dataset",
    "algo",
    "predictor",
    "beta_measured",
    "trial",
    "cost",
    "opt_or_lowerbound",
    "words_peak",
    "runtime_ms",
    "branch",
    "quality_l",
    "opt_exact",
    "est_cost_1",
    "est_cost_2",
    "concession_words",
    "error",
];

fn opt_str<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

impl ReportRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.dataset.clone(),
            self.algo.to_string(),
            self.predictor.clone(),
            self.beta_measured.to_string(),
            self.trial.to_string(),
            opt_str(self.cost),
            self.opt_or_lowerbound.to_string(),
            self.words_peak.to_string(),
            self.runtime_ms.to_string(),
            opt_str(self.branch.map(Branch::index)),
            self.quality_l.to_string(),
            (self.opt_exact as u8).to_string(),
            opt_str(self.est_cost_first),
            opt_str(self.est_cost_second),
            self.concession_words.to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

struct TrialInstance {
    graph: SignedGraph,
    reference: Option<Clustering>,
    index: Option<HashMap<String, Vertex>>,
    opt: u64,
    opt_exact: bool,
}

fn base_instance(cfg: &ExperimentConfig) -> Result<Option<TrialInstance>> {
    let Dataset::EdgeList { path, reference } = &cfg.dataset else {
        return Ok(None);
    };
    let loaded = load_edge_list(path, EdgeListOptions::default())?;
    let index = loaded.index();
    let truth = match reference {
        Some(r) => Some(load_reference(r, loaded.graph.n(), Some(&index))?),
        None => None,
    };
    finish_instance(loaded.graph, truth, Some(index)).map(Some)
}

fn finish_instance(
    graph: SignedGraph,
    reference: Option<Clustering>,
    index: Option<HashMap<String, Vertex>>,
) -> Result<TrialInstance> {
    let (opt, opt_exact) = if graph.n() <= BRUTE_FORCE_LIMIT {
        (brute_force_opt(&graph)?.0, true)
    } else {
        (bad_triangle_lower_bound(&graph), false)
    };
    Ok(TrialInstance {
        graph,
        reference,
        index,
        opt,
        opt_exact,
    })
}

fn run_trial(cfg: &ExperimentConfig, base: Option<&TrialInstance>, trial: usize) -> Result<Vec<ReportRow>> {
    let trial_seed = rng::derive_seed(cfg.seed, trial as u64);
    let owned;
    let inst = match (base, &cfg.dataset) {
        (Some(b), _) => b,
        (None, Dataset::Sbm { n, k, p }) => {
            let (g, truth) = generate_sbm(*n, *k, *p, rng::derive_seed(trial_seed, 100))?;
            owned = finish_instance(g, Some(truth), None)?;
            &owned
        }
        (None, Dataset::EdgeList { .. }) => unreachable!("edge lists are loaded once"),
    };
    let g = &inst.graph;
    let dataset = cfg.dataset.label();
    let mut rows = Vec::new();
    for &algo in &cfg.algos {
        let stream = stream_for(algo, g, cfg.churn, trial_seed);
        for spec in &cfg.predictors {
            let mut row = ReportRow {
                dataset: dataset.clone(),
                algo,
                predictor: spec.to_string(),
                beta_measured: f64::NAN,
                trial,
                cost: None,
                opt_or_lowerbound: inst.opt,
                words_peak: 0,
                runtime_ms: 0.0,
                branch: None,
                quality_l: f64::NAN,
                opt_exact: inst.opt_exact,
                est_cost_first: None,
                est_cost_second: None,
                concession_words: 0,
                error: None,
            };
            let result = (|| -> Result<()> {
                let oracle = spec.build(g.n(), inst.reference.as_ref(), inst.index.as_ref())?;
                let l = quality_l(g, oracle.as_ref());
                row.quality_l = l;
                row.beta_measured = match (inst.opt_exact, inst.opt) {
                    (false, _) => l,
                    (true, 0) if l == 0.0 => 1.0,
                    (true, 0) => f64::INFINITY,
                    (true, opt) => l / opt as f64,
                };
                let stream = stream.as_ref().map_err(|e| Error::Config(e.to_string()))?;
                let out = run_algorithm(algo, stream, oracle.as_ref(), &cfg.params, trial_seed)?;
                // Exact cost always comes from the replayed graph.
                let truth = replay_oracle(stream)?;
                row.cost = Some(cost(&truth, &out.clustering)?);
                row.words_peak = out.words_peak;
                row.branch = out.branch;
                row.est_cost_first = out.est_cost_first;
                row.est_cost_second = out.est_cost_second;
                row.concession_words = out.concession_words;
                if cfg.timing {
                    row.runtime_ms = out.runtime_ms;
                }
                Ok(())
            })();
            if let Err(e) = result {
                log::warn!("trial {trial} {algo} {spec}: {e}");
                row.error = Some(e.to_string());
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Rows in (algo, predictor, trial) order of the config. Trials run on
/// worker threads; a failed trial is recorded with its error message.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    let base = base_instance(cfg)?;
    let workers = std::thread::available_parallelism()
        .map_or(1, |w| w.get())
        .min(cfg.trials);
    let results: Vec<Vec<(usize, Result<Vec<ReportRow>>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let base = base.as_ref();
                scope.spawn(move || {
                    (w..cfg.trials)
                        .step_by(workers)
                        .map(|t| (t, run_trial(cfg, base, t)))
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("trial worker panicked")).collect()
    });
    let mut per_trial: Vec<(usize, Result<Vec<ReportRow>>)> = results.into_iter().flatten().collect();
    per_trial.sort_by_key(|(t, _)| *t);
    let mut rows = Vec::new();
    for (_, r) in per_trial {
        rows.extend(r?);
    }
    let algo_pos = |a: Algo| cfg.algos.iter().position(|&x| x == a).unwrap_or(usize::MAX);
    let names: Vec<String> = cfg.predictors.iter().map(ToString::to_string).collect();
    let pred_pos = |p: &str| names.iter().position(|x| x == p).unwrap_or(usize::MAX);
    rows.sort_by_key(|r| (algo_pos(r.algo), pred_pos(&r.predictor), r.trial));
    Ok(rows)
}

fn csv_err(path: Option<&Path>, e: csv::Error) -> Error {
    match (e.into_kind(), path) {
        (csv::ErrorKind::Io(io), Some(p)) => Error::io(p, io),
        (csv::ErrorKind::Io(io), None) => Error::io(Path::new("<stream>"), io),
        (other, _) => Error::Config(format!("csv: {other:?}")),
    }
}

fn write_table<W: std::io::Write>(
    w: W,
    path: Option<&Path>,
    header: &[&str],
    records: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in records {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path.unwrap_or(Path::new("<stream>")), e))
}

pub fn write_rows_to<W: std::io::Write>(w: W, rows: &[ReportRow]) -> Result<()> {
    write_table(w, None, &ROW_HEADER, rows.iter().map(ReportRow::record))
}

pub fn write_rows(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_table(f, Some(path), &ROW_HEADER, rows.iter().map(ReportRow::record))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub algo: Algo,
    pub predictor: String,
    pub trials: usize,
    pub failures: usize,
    pub mean_cost: f64,
    pub sd_cost: f64,
    pub min_cost: u64,
    pub mean_words: f64,
    pub mean_beta: f64,
    /// Mean cost over the mean cost of the prediction-free counterpart.
    pub ratio_to_baseline: Option<f64>,
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "dataset",
    "algo",
    "predictor",
    "trials",
    "failures",
    "mean_cost",
    "sd_cost",
    "min_cost",
    "mean_words",
    "mean_beta",
    "ratio_to_baseline",
];

impl SummaryRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.dataset.clone(),
            self.algo.to_string(),
            self.predictor.clone(),
            self.trials.to_string(),
            self.failures.to_string(),
            self.mean_cost.to_string(),
            self.sd_cost.to_string(),
            self.min_cost.to_string(),
            self.mean_words.to_string(),
            self.mean_beta.to_string(),
            opt_str(self.ratio_to_baseline),
        ]
    }
}

/// Group by (dataset, algo, predictor), sorted by those keys.
pub fn summarize(rows: &[ReportRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, Algo, String), Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.dataset.clone(), r.algo, r.predictor.clone()))
            .or_default()
            .push(r);
    }
    let mut out: Vec<SummaryRow> = groups
        .iter()
        .map(|((dataset, algo, predictor), rs)| {
            let ok: Vec<&&ReportRow> = rs.iter().filter(|r| r.cost.is_some()).collect();
            let costs: Vec<f64> = ok.iter().map(|r| r.cost.unwrap() as f64).collect();
            let m = costs.len() as f64;
            let mean = costs.iter().sum::<f64>() / m;
            let sd = if costs.len() > 1 {
                (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                dataset: dataset.clone(),
                algo: *algo,
                predictor: predictor.clone(),
                trials: rs.len(),
                failures: rs.len() - ok.len(),
                mean_cost: mean,
                sd_cost: sd,
                min_cost: ok.iter().filter_map(|r| r.cost).min().unwrap_or(0),
                mean_words: ok.iter().map(|r| r.words_peak as f64).sum::<f64>() / m,
                mean_beta: ok.iter().map(|r| r.beta_measured).sum::<f64>() / m,
                ratio_to_baseline: None,
            }
        })
        .collect();
    let means: HashMap<(String, Algo, String), f64> = out
        .iter()
        .map(|s| ((s.dataset.clone(), s.algo, s.predictor.clone()), s.mean_cost))
        .collect();
    for s in &mut out {
        if let Some(base) = s.algo.baseline() {
            if let Some(&b) = means.get(&(s.dataset.clone(), base, s.predictor.clone())) {
                s.ratio_to_baseline = Some(s.mean_cost / b);
            }
        }
    }
    out
}

pub fn write_summary(path: &Path, summary: &[SummaryRow]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_table(f, Some(path), &SUMMARY_HEADER, summary.iter().map(SummaryRow::record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeUpdate;
    use crate::graph::Sign;

    #[test]
    fn parse_config() {
        let cfg = ExperimentConfig::parse(
            "# sweep\ndataset = sbm:20:2:0.9\nalgos = dynamic, cklpu\neps0 = 0,0.1\ntrials = 3\nseed = 7\nk = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.dataset, Dataset::Sbm { n: 20, k: 2, p: 0.9 });
        assert_eq!(cfg.algos, vec![Algo::Dynamic, Algo::Cklpu]);
        assert_eq!(cfg.predictors, vec![PredictorSpec::Noisy(0.0), PredictorSpec::Noisy(0.1)]);
        assert_eq!((cfg.trials, cfg.seed, cfg.params.k), (3, 7, 4));
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("trials").is_err());
        assert!(ExperimentConfig::parse("algos = nope").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig {
            trials: 0,
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.dataset = Dataset::EdgeList {
            path: PathBuf::from("/nonexistent/graph.txt"),
            reference: None,
        };
        cfg.predictors = vec![PredictorSpec::Constant(0.5)];
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("/nonexistent/graph.txt"), "{err}");
    }

    #[test]
    fn replay_examples() {
        let (g, _) = generate_sbm(15, 3, 0.8, 1).unwrap();
        for mode in [StreamMode::InsertionOnly, StreamMode::Dynamic] {
            let s = to_stream(&g, mode, 1.0, 2).unwrap();
            assert_eq!(replay_oracle(&s).unwrap(), g);
        }
        let bad = Stream {
            n: 3,
            complete: true,
            updates: vec![EdgeUpdate::delete(0, 2, Sign::Positive)],
        };
        assert!(matches!(replay_oracle(&bad), Err(Error::StreamIntegrity(_))));
    }

    #[test]
    fn small_experiment_rows_and_summary() {
        let cfg = ExperimentConfig {
            dataset: Dataset::Sbm { n: 10, k: 2, p: 0.9 },
            algos: vec![Algo::Dynamic, Algo::Cklpu, Algo::Insertion, Algo::CmPivot, Algo::General],
            predictors: vec![PredictorSpec::Noisy(0.0), PredictorSpec::Noisy(0.2)],
            trials: 3,
            ..ExperimentConfig::default()
        };
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 5 * 2 * 3);
        // Complete SBM instances are rejected by the general algorithm's
        // cost path only if it fails; it should run.
        for r in &rows {
            assert!(r.opt_exact);
            assert!(r.error.is_none() || r.algo == Algo::General, "{:?}", r.error);
            if let Some(c) = r.cost {
                assert!(c >= r.opt_or_lowerbound);
            }
        }
        let s = summarize(&rows);
        assert_eq!(s.len(), 10);
        let dyn0 = s.iter().find(|x| x.algo == Algo::Dynamic && x.predictor == "noisy:0").unwrap();
        assert!(dyn0.ratio_to_baseline.is_some());
        assert!(s.iter().filter(|x| x.algo == Algo::Cklpu).all(|x| x.ratio_to_baseline.is_none()));
    }

    #[test]
    fn summary_of_identical_costs() {
        let row = ReportRow {
            dataset: "d".into(),
            algo: Algo::Pivot,
            predictor: "const:1".into(),
            beta_measured: 1.0,
            trial: 0,
            cost: Some(5),
            opt_or_lowerbound: 5,
            words_peak: 10,
            runtime_ms: 0.0,
            branch: None,
            quality_l: 5.0,
            opt_exact: true,
            est_cost_first: None,
            est_cost_second: None,
            concession_words: 0,
            error: None,
        };
        let one = summarize(std::slice::from_ref(&row));
        assert_eq!((one[0].mean_cost, one[0].sd_cost), (5.0, 0.0));
        let many: Vec<_> = (0..20).map(|t| ReportRow { trial: t, ..row.clone() }).collect();
        let s = summarize(&many);
        assert_eq!((s[0].mean_cost, s[0].sd_cost, s[0].min_cost), (5.0, 0.0, 5));
    }

    #[test]
    fn reference_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ref.txt");
        let c = Clustering::from_labels([0, 1, 0, 2]);
        write_reference(&p, &c).unwrap();
        assert_eq!(load_reference(&p, 4, None).unwrap(), c);
        std::fs::write(&p, "0 a\n2 a\n").unwrap();
        assert_eq!(load_reference(&p, 4, None).unwrap(), Clustering::from_labels([0, 1, 0, 2]));
    }
}
