//! Command-line front end: `fit`, `sweep depth|noise`, `selftest`, `predict`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration or validation
//! failure.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::experiments::{run_fit, run_sweep, ExperimentSpec, SweepKind};
use crate::model::{Checkpoint, EvalMode, TrainingRecord};
use crate::report::{aggregates_csv, figure_csv, predictions_csv, sweep_plot_script, trace_csv, OutputDir};
use crate::selftest::{run_selftest, Fault};

#[derive(Debug, Parser)]
#[command(name = "vqra", version, about = "Variational quantum regression: fit, sweep, selftest, predict")]
pub struct Cli {
    /// JSON experiment configuration; defaults apply to every omitted key.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for training rounds and sweep cells.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Overrides `train.seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Switches to shot-sampled swap tests with N shots per estimate.
    #[arg(long, global = true, value_name = "N")]
    pub shots: Option<u64>,
    /// Only errors are printed.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    Depth,
    Noise,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model on one target and write trace, predictions and checkpoint.
    Fit,
    /// Train every configuration across encoder depths or noise strengths.
    Sweep {
        #[arg(value_enum)]
        kind: SweepArg,
    },
    /// Run the fast invariant suite.
    Selftest {
        #[arg(long, hide = true)]
        fault: Option<String>,
    },
    /// Evaluate a checkpoint on inputs given as `--x 0.1 --x -0.4,0.2`, read
    /// from a CSV file, or read from standard input.
    Predict {
        #[arg(long, value_name = "PATH")]
        checkpoint: PathBuf,
        #[arg(long = "x", value_name = "X[,X2]", allow_hyphen_values = true)]
        xs: Vec<String>,
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Json(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 2;
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let command_line: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match &cli.command {
        Command::Fit => cmd_fit(&cli, command_line),
        Command::Sweep { kind } => cmd_sweep(&cli, *kind, command_line),
        Command::Selftest { fault } => cmd_selftest(&cli, fault.as_deref()),
        Command::Predict { checkpoint, xs, input } => cmd_predict(&cli, checkpoint, xs, input.as_deref()),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

/// Reads, overrides and validates the experiment configuration.
fn load_spec(cli: &Cli) -> std::result::Result<ExperimentSpec, Failure> {
    let mut spec = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentSpec>(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => ExperimentSpec::default(),
    };
    if let Some(seed) = cli.seed {
        spec.train.seed = seed;
    }
    if let Some(count) = cli.shots {
        spec.eval_mode = EvalMode::Shots {
            count,
            seed: spec.train.seed,
        };
    }
    spec.validate().map_err(|e| Failure::Config(e.to_string()))?;
    Ok(spec)
}

fn out_dir(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn cmd_fit(cli: &Cli, command_line: Vec<String>) -> CliResult {
    let spec = load_spec(cli)?;
    let start = Instant::now();
    let fit = run_fit(&spec)?;
    let mut out = OutputDir::new(out_dir(cli, "vqra-fit"))?;
    out.write("trace.csv", &trace_csv(&fit.trace)?)?;
    out.write("predictions.csv", &predictions_csv(&fit)?)?;
    let training = TrainingRecord {
        xs: fit.dataset.xs().to_vec(),
        ys: fit.dataset.ys().to_vec(),
        predictions: fit
            .dataset
            .xs()
            .iter()
            .map(|x| fit.model.predict(x))
            .collect::<crate::Result<Vec<_>>>()?,
    };
    let checkpoint = Checkpoint {
        circuit: fit.model.spec(),
        noise: fit.model.noise().clone(),
        eval_mode: fit.model.eval_mode(),
        loss_history: fit.trace.loss_history.clone(),
        training: Some(training),
    };
    out.write_json("checkpoint.json", &checkpoint)?;
    let config = serde_json::to_value(&spec).map_err(Error::from)?;
    let root = out.root().to_path_buf();
    out.finish(command_line, config, vec![spec.train.seed], start.elapsed().as_secs_f64())?;
    if !cli.quiet {
        println!(
            "{}: training MSE {:.4e} after {} iterations; max grid error {:.4}; outputs in {}",
            spec.target.name(),
            fit.train_mse,
            fit.trace.loss_history.len(),
            fit.max_grid_error(),
            root.display()
        );
    }
    Ok(())
}

fn cmd_sweep(cli: &Cli, kind: SweepArg, command_line: Vec<String>) -> CliResult {
    let spec = load_spec(cli)?;
    let (kind, axis, fig) = match kind {
        SweepArg::Depth => (
            SweepKind::Depth,
            spec.sweep_depths.iter().map(|&d| d as f64).collect::<Vec<_>>(),
            "fig5.csv",
        ),
        SweepArg::Noise => (SweepKind::Noise, spec.sweep_strengths.clone(), "fig6.csv"),
    };
    let start = Instant::now();
    let sweep = run_sweep(&spec, kind, &axis, &[1, 2, 3, 4])?;
    let mut out = OutputDir::new(out_dir(cli, "vqra-sweep"))?;
    out.write(fig, &figure_csv(&sweep)?)?;
    out.write(
        "aggregates.csv",
        &aggregates_csv(&sweep, spec.d_e, spec.noise.channel().strength())?,
    )?;
    out.write_json("sweep.json", &sweep)?;
    out.write("plot.gp", sweep_plot_script(&sweep, fig).as_bytes())?;
    let config = serde_json::to_value(&spec).map_err(Error::from)?;
    let seeds = (0..spec.train.rounds as u64).map(|r| spec.train.seed.wrapping_add(r)).collect();
    let root = out.root().to_path_buf();
    out.finish(command_line, config, seeds, start.elapsed().as_secs_f64())?;
    if !cli.quiet {
        let mut stdout = std::io::stdout().lock();
        for &c in &sweep.configs {
            let means: Vec<String> = sweep.mean_losses(c).iter().map(|m| format!("{m:.3e}")).collect();
            writeln!(stdout, "config {c}: {}", means.join(" "))?;
        }
        writeln!(stdout, "outputs in {}", root.display())?;
    }
    Ok(())
}

fn cmd_selftest(cli: &Cli, fault: Option<&str>) -> CliResult {
    let fault = fault
        .map(|f| f.parse::<Fault>())
        .transpose()
        .map_err(Failure::Config)?;
    let report = run_selftest(fault);
    if !cli.quiet {
        print!("{}", report.table());
    }
    match report.first_failure() {
        None => Ok(()),
        Some(c) => Err(Failure::Runtime(format!("check failed: {} ({})", c.name, c.detail))),
    }
}

fn parse_row(row: &str) -> std::result::Result<Vec<f64>, Failure> {
    row.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Config(format!("not a number: {v:?}")))
        })
        .collect()
}

fn cmd_predict(cli: &Cli, checkpoint: &Path, xs: &[String], input: Option<&Path>) -> CliResult {
    let text = std::fs::read_to_string(checkpoint)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", checkpoint.display())))?;
    let ck: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("malformed checkpoint {}: {e}", checkpoint.display())))?;
    let mut model = ck.model().map_err(|e| Failure::Config(format!("invalid checkpoint: {e}")))?;
    if let Some(count) = cli.shots {
        let seed = cli.seed.unwrap_or(0);
        model = model.with_eval_mode(EvalMode::Shots { count, seed })?;
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    if !xs.is_empty() {
        for x in xs {
            rows.push(parse_row(x)?);
        }
    } else {
        let lines: Vec<String> = match input {
            Some(path) => std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?
                .lines()
                .map(str::to_string)
                .collect(),
            None => std::io::stdin().lock().lines().collect::<std::io::Result<_>>()?,
        };
        for line in lines.iter().map(|l| l.trim()).filter(|l| !l.is_empty()) {
            // A header row of non-numeric names is skipped.
            if rows.is_empty() && line.split(',').any(|v| v.trim().parse::<f64>().is_err()) {
                continue;
            }
            rows.push(parse_row(line)?);
        }
    }

    let n = model.n_features();
    let mut stdout = std::io::stdout().lock();
    let mut header: Vec<String> = (1..=n).map(|i| if i == 1 { "x".into() } else { format!("x{i}") }).collect();
    header.push("f".into());
    writeln!(stdout, "{}", header.join(","))?;
    for x in rows {
        if x.len() != n {
            return Err(Failure::Config(format!("expected {n} features per row, got {}", x.len())));
        }
        if !cli.quiet && x.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            eprintln!("warning: input {x:?} lies outside [-1, 1]");
        }
        let f = model.predict(&x)?;
        let cells: Vec<String> = x.iter().map(f64::to_string).chain([f.to_string()]).collect();
        writeln!(stdout, "{}", cells.join(","))?;
    }
    Ok(())
}
