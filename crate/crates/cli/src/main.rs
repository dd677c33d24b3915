//! `onecls` command-line interface.
//!
//! Exit status is 0 on success, 1 for runtime and data errors and 2 for
//! usage errors.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use onecls::data::read_table;
use onecls::eval::{self, CvOptions, ExperimentOptions, Grid, MethodSpec, TrainedModel};
use onecls::{load_csv, write_atomic, LabelColumn};

use config::{apply_grid_json, apply_grid_overrides, method_spec, parse_label_column, RunConfig};

#[derive(Parser)]
#[command(
    name = "onecls",
    version,
    about = "One-class classification with (ellipsoidal) subspace SVDD"
)]
struct Cli {
    /// Log progress to stderr (RUST_LOG overrides).
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on every target sample of a dataset.
    Train(RunArgs),
    /// Repeated train/test splits with cross-validated model selection.
    Experiment(ExperimentArgs),
    /// Score samples with a saved model.
    Score(ScoreArgs),
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// CSV file with one sample per row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Column holding the class label: an index or "last" [default: last].
    #[arg(long)]
    label_column: Option<String>,
    /// Class treated as the target; every other class is an outlier.
    #[arg(long)]
    target: Option<String>,
    /// svdd, esvdd, ssvdd or essvdd [default: essvdd].
    #[arg(long)]
    method: Option<String>,
    /// Apply the RBF kernel map before fitting.
    #[arg(long)]
    kernelized: bool,
    /// none, psi1..3 or upsilon1..3 [default: none].
    #[arg(long)]
    reg: Option<String>,
    /// Hyperparameter overrides, e.g. "C=0.1/0.3,d=2,k_max=10".
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, env = "ONECLS_SEED")]
    seed: Option<u64>,
    /// JSON file providing defaults for any of these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads for the grid search.
    #[arg(long)]
    jobs: Option<usize>,
    /// Cross-validation folds [default: 5].
    #[arg(long)]
    folds: Option<usize>,
    /// Output directory [default: .].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ExperimentArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Number of random splits [default: 5].
    #[arg(long)]
    repetitions: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ScoreArgs {
    /// Model written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// CSV file with the samples to score.
    #[arg(long)]
    data: PathBuf,
    /// Label column to ignore: an index, "last" or "none".
    #[arg(long, default_value = "last")]
    label_column: String,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Flags merged with the optional config file and defaults.
#[derive(Debug)]
struct Resolved {
    data: PathBuf,
    label_column: LabelColumn,
    target: String,
    spec: MethodSpec,
    grid: Grid,
    seed: u64,
    jobs: Option<usize>,
    folds: usize,
    out: PathBuf,
    repetitions: usize,
}

fn resolve(args: &RunArgs, repetitions: Option<usize>) -> Result<Resolved, Failure> {
    let file = match &args.config {
        Some(p) => RunConfig::load(p).map_err(|e| usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    let data = args
        .data
        .clone()
        .or(file.data)
        .ok_or_else(|| usage("missing --data"))?;
    let target = args
        .target
        .clone()
        .or(file.target)
        .ok_or_else(|| usage("missing --target"))?;
    let label_column = args
        .label_column
        .clone()
        .or(file.label_column)
        .unwrap_or_else(|| "last".into())
        .parse::<LabelColumn>()
        .map_err(usage)?;
    let method = args
        .method
        .clone()
        .or(file.method)
        .unwrap_or_else(|| "essvdd".into());
    let reg = args
        .reg
        .clone()
        .or(file.reg)
        .unwrap_or_else(|| "none".into());
    let kernelized = args.kernelized || file.kernelized.unwrap_or(false);
    let spec = method_spec(&method, &reg, kernelized).map_err(usage)?;

    let mut grid = Grid::default();
    if let Some(map) = &file.grid {
        apply_grid_json(&mut grid, map).map_err(usage)?;
    }
    if let Some(g) = &args.grid {
        apply_grid_overrides(&mut grid, g).map_err(usage)?;
    }
    grid.validate().map_err(|e| usage(e.to_string()))?;

    let folds = args.folds.or(file.folds).unwrap_or(5);
    let repetitions = repetitions.or(file.repetitions).unwrap_or(5);
    if folds < 2 {
        return Err(usage("--folds must be at least 2"));
    }
    if repetitions == 0 {
        return Err(usage("--repetitions must be at least 1"));
    }
    Ok(Resolved {
        data,
        label_column,
        target,
        spec,
        grid,
        seed: args.seed.or(file.seed).unwrap_or(0),
        jobs: args.jobs.or(file.jobs),
        folds,
        out: args
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from(".")),
        repetitions,
    })
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn cmd_train(args: &RunArgs) -> Result<(), Failure> {
    let cfg = resolve(args, None)?;
    let ds = load_csv(&cfg.data, cfg.label_column, &cfg.target).map_err(anyhow::Error::from)?;
    let opts = CvOptions {
        k_max: cfg.grid.k_max,
        seed: cfg.seed,
        jobs: cfg.jobs,
    };
    let (model, selection) =
        eval::train(&ds, &cfg.spec, &cfg.grid, cfg.folds, &opts).map_err(anyhow::Error::from)?;
    ensure_dir(&cfg.out)?;
    let path = cfg.out.join("model.json");
    model.save(&path).map_err(anyhow::Error::from)?;
    if let Some(sel) = selection {
        let json = serde_json::to_string_pretty(&sel).map_err(anyhow::Error::from)?;
        write_atomic(&cfg.out.join("selection.json"), json.as_bytes())
            .map_err(anyhow::Error::from)?;
        log::info!("selected {} (CV Gmean {:.4})", sel.best, sel.score);
    }
    println!("{}", path.display());
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<(), Failure> {
    let cfg = resolve(&args.run, args.repetitions)?;
    let ds = load_csv(&cfg.data, cfg.label_column, &cfg.target).map_err(anyhow::Error::from)?;
    let opts = ExperimentOptions {
        repetitions: cfg.repetitions,
        base_seed: cfg.seed,
        folds: cfg.folds,
        jobs: cfg.jobs,
        ..Default::default()
    };
    let res =
        eval::run_experiment(&ds, &cfg.spec, &cfg.grid, &opts).map_err(anyhow::Error::from)?;
    ensure_dir(&cfg.out)?;
    let summary = cfg.out.join("summary.json");
    let curves = cfg.out.join("curves.csv");
    res.write(&summary, &curves).map_err(anyhow::Error::from)?;
    println!(
        "mean Gmean {:.4} over {} repetitions",
        res.mean_gmean,
        res.repetitions.len()
    );
    println!("{}", summary.display());
    println!("{}", curves.display());
    Ok(())
}

fn cmd_score(args: &ScoreArgs) -> Result<(), Failure> {
    let label_column = parse_label_column(&args.label_column).map_err(usage)?;
    let model = TrainedModel::load(&args.model).map_err(anyhow::Error::from)?;
    let table = read_table(&args.data, label_column).map_err(anyhow::Error::from)?;
    let mut out = String::new();
    if table.features.ncols() > 0 {
        let decisions = model
            .decide_batch(&table.features)
            .map_err(anyhow::Error::from)?;
        out.push_str("distance_sq,is_target\n");
        for (d, t) in decisions {
            out.push_str(&format!("{d},{t}\n"));
        }
    }
    match &args.out {
        Some(p) => write_atomic(p, out.as_bytes()).map_err(anyhow::Error::from)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Score(a) => cmd_score(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
