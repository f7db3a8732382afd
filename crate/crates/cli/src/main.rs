use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use corrclust::ballgrow::Fallback;
use corrclust::graph::{cost, generate_sbm, read_stream, to_full_stream, to_stream, write_stream, StreamMode};
use corrclust::harness::{
    load_reference, replay_oracle, run_algorithm, run_experiment, summarize, write_reference, write_rows, write_rows_to,
    write_summary, Algo, AlgoParams, ExperimentConfig,
};
use corrclust::pivot::Branch;
use corrclust::predictor::PredictorSpec;

#[derive(Parser)]
#[command(name = "corrclust", version, about = "Streaming correlation clustering with distance predictions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one algorithm over a stream file.
    Run(RunArgs),
    /// Write an SBM instance as a stream file plus planted labels.
    Generate(GenerateArgs),
    /// Run a sweep from a key=value config and emit CSV rows.
    Experiment(ExperimentArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// dynamic, insertion, general, cklpu, cm or pivot.
    #[arg(long)]
    algo: Algo,
    #[arg(long)]
    stream: PathBuf,
    /// noisy:EPS0, embed:PATH, table:PATH or const:D.
    #[arg(long, default_value = "const:0.5")]
    predictor: PredictorSpec,
    /// `vertex label` lines; needed by noisy predictors.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 4.0)]
    c: f64,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Word budget for stored negative edges (general algorithm).
    #[arg(long)]
    neg_budget: Option<usize>,
    #[arg(long, default_value = "ballgrow")]
    fallback: Fallback,
    /// Report CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the clustering as `vertex label` lines.
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenMode {
    /// Positive inserts only (complete instance).
    Insertion,
    /// Positive inserts with decoy insert/delete pairs.
    Dynamic,
    /// Every positive and negative pair as an insert.
    Full,
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.9)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "insertion")]
    mode: GenMode,
    #[arg(long, default_value_t = 0.5)]
    churn: f64,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the planted clustering.
    #[arg(long)]
    reference_out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ExperimentArgs {
    /// key=value config file; omit to configure with --set only.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` lines applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Row CSV; overrides `output` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grouped summary CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn branch_str(b: Option<Branch>) -> String {
    b.map_or_else(String::new, |b| b.index().to_string())
}

fn run(args: RunArgs) -> Result<()> {
    let stream = read_stream(&args.stream)?;
    let reference = match &args.reference {
        Some(p) => Some(load_reference(p, stream.n, None)?),
        None => None,
    };
    let oracle = args.predictor.build(stream.n, reference.as_ref(), None)?;
    let params = AlgoParams {
        epsilon: args.epsilon,
        c: args.c,
        k: args.k,
        neg_budget_words: args.neg_budget,
        fallback: args.fallback,
        ..AlgoParams::default()
    };
    let out = run_algorithm(args.algo, &stream, oracle.as_ref(), &params, args.seed)?;
    let truth = replay_oracle(&stream)?;
    let true_cost = cost(&truth, &out.clustering)?;
    let runtime = if args.timing { out.runtime_ms } else { 0.0 };
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
    let header = "algo,n,seed,chosen_branch,est_cost_1,est_cost_2,true_cost,clusters,words_peak,concession_words,runtime_ms";
    let line = format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        args.algo,
        stream.n,
        args.seed,
        branch_str(out.branch),
        opt(out.est_cost_first),
        opt(out.est_cost_second),
        true_cost,
        out.clustering.num_clusters(),
        out.words_peak,
        out.concession_words,
        runtime
    );
    match &args.out {
        Some(p) => std::fs::write(p, format!("{header}\n{line}\n")).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{header}\n{line}"),
    }
    if let Some(p) = &args.labels_out {
        write_reference(p, &out.clustering)?;
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let (g, truth) = generate_sbm(args.n, args.k, args.p, args.seed)?;
    let stream = match args.mode {
        GenMode::Insertion => to_stream(&g, StreamMode::InsertionOnly, 0.0, args.seed)?,
        GenMode::Dynamic => to_stream(&g, StreamMode::Dynamic, args.churn, args.seed)?,
        GenMode::Full => to_full_stream(&g, args.seed),
    };
    write_stream(&stream, &args.out)?;
    if let Some(p) = &args.reference_out {
        write_reference(p, &truth)?;
    }
    eprintln!("wrote {} updates for n={} ({} positive edges)", stream.updates.len(), g.n(), g.num_pos());
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let mut text = match &args.config {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?,
        None => String::new(),
    };
    for kv in &args.set {
        if !kv.contains('=') {
            bail!("--set expects key=value, got {kv:?}");
        }
        text.push('\n');
        text.push_str(kv);
    }
    let mut cfg = ExperimentConfig::parse(&text)?;
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    let rows = run_experiment(&cfg)?;
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    match &cfg.output {
        Some(p) => write_rows(p, &rows)?,
        None => write_rows_to(std::io::stdout().lock(), &rows)?,
    }
    if let Some(p) = &args.summary {
        write_summary(p, &summarize(&rows))?;
    }
    eprintln!("{} rows, {} failed trials", rows.len(), failures);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(a) => run(a),
        Cmd::Generate(a) => generate(a),
        Cmd::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
