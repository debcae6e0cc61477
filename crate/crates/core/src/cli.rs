//! `sfbench` command line.
//!
//! Settings are layered: built-in defaults, then `--config`, then
//! `SFBENCH_OUT_DIR` (output directory only), then flags.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::data::{load_dataset, Instance, SchemaSpec};
use crate::error::{DataError, HarnessError};
use crate::harness::{
    emit_report, mean_ranks, prepare_dataset, run_loo, summarize, LooContext, ResultRow, RunConfig,
};
use crate::methods::Method;
use crate::metrics::Metric;

pub const OUT_DIR_ENV: &str = "SFBENCH_OUT_DIR";

/// Exit statuses, one per error category.
pub mod exit {
    pub const USAGE: u8 = 2;
    pub const DATA: u8 = 3;
    pub const CONFIG: u8 = 4;
    pub const OUTPUT: u8 = 5;
    pub const INTERNAL: u8 = 70;
}

#[derive(Debug, Parser)]
#[command(
    name = "sfbench",
    version,
    about = "Semi-factual explanation benchmark"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and check datasets without running anything.
    Validate(Overrides),
    /// Print one query's semi-factual and metrics as JSON.
    Explain {
        #[arg(long)]
        query: usize,
        #[arg(long)]
        method: Method,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the leave-one-out benchmark and write a report.
    Bench(Overrides),
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// TOML (or .json) run config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset schema spec; repeat for several. Replaces the config's list.
    #[arg(long = "dataset")]
    pub datasets: Vec<PathBuf>,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long)]
    pub tau_factor: Option<f64>,
    #[arg(long)]
    pub per_class_min: Option<usize>,
    /// `on` (KLEOR methods), `off`, `all`, or a comma-separated method list.
    #[arg(long)]
    pub knn_filter: Option<String>,
    #[arg(long)]
    pub subsample: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// The effective run config.
    pub fn resolve(&self, env_out: Option<PathBuf>) -> Result<RunConfig, HarnessError> {
        let mut config = match &self.config {
            Some(path) => {
                let mut c = RunConfig::from_file(path)?;
                let base = path.parent().unwrap_or_else(|| Path::new(""));
                for d in &mut c.datasets {
                    if d.is_relative() {
                        *d = base.join(&*d);
                    }
                }
                c
            }
            None => RunConfig::default(),
        };
        if let Some(out) = env_out {
            config.out = out;
        }
        if !self.datasets.is_empty() {
            config.datasets = self.datasets.clone();
        }
        // Absolute paths keep an embedded config usable from any directory.
        for d in &mut config.datasets {
            if let Ok(abs) = std::path::absolute(&*d) {
                *d = abs;
            }
        }
        if let Some(m) = &self.methods {
            config.methods = m.clone();
        }
        if let Some(v) = self.tau_factor {
            config.tau_factor = v;
        }
        if let Some(v) = self.per_class_min {
            config.per_class_min = v;
        }
        if let Some(v) = &self.knn_filter {
            config.knn_filter = parse_knn_filter(v)?;
        }
        if let Some(v) = self.subsample {
            config.subsample = Some(v);
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.workers {
            config.workers = v;
        }
        if let Some(v) = &self.out {
            config.out = v.clone();
        }
        config.validate()?;
        if config.datasets.is_empty() {
            return Err(HarnessError::Config(
                "no datasets given (use --dataset or a config file)".into(),
            ));
        }
        Ok(config)
    }
}

fn parse_knn_filter(value: &str) -> Result<Vec<Method>, HarnessError> {
    match value.trim() {
        "on" => Ok(Method::ALL.into_iter().filter(|m| m.is_kleor()).collect()),
        "off" | "none" => Ok(Vec::new()),
        "all" => Ok(Method::ALL.to_vec()),
        list => list
            .split(',')
            .map(|s| s.parse().map_err(HarnessError::Config))
            .collect(),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Harness(HarnessError::Data(_)) => exit::DATA,
            CliError::Harness(HarnessError::Config(_)) => exit::CONFIG,
            CliError::Harness(HarnessError::Output { .. }) => exit::OUTPUT,
            CliError::Harness(_) => exit::INTERNAL,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Harness(e.into())
    }
}

/// Parses `std::env::args` and runs the command.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    let env_out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let mut stdout = std::io::stdout().lock();
    match dispatch(cli.command, env_out, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn dispatch(
    command: Command,
    env_out: Option<PathBuf>,
    out: &mut dyn std::io::Write,
) -> Result<(), CliError> {
    let write_err = |e: std::io::Error| {
        CliError::Harness(HarnessError::Output {
            path: PathBuf::from("<stdout>"),
            source: e,
        })
    };
    match command {
        Command::Validate(overrides) => {
            let config = overrides.resolve(env_out)?;
            for path in &config.datasets {
                let spec = SchemaSpec::from_file(path)?;
                let csv = spec.csv.clone().ok_or_else(|| {
                    HarnessError::Config(format!(
                        "{}: schema spec has no `csv` entry",
                        path.display()
                    ))
                })?;
                let ds = load_dataset(&csv, &spec)?;
                let numeric = ds.schema().iter().filter(|f| f.is_numeric()).count();
                writeln!(
                    out,
                    "ok {}: {} rows, {} features ({} numeric, {} categorical), class sizes {}/{}",
                    ds.name(),
                    ds.len(),
                    ds.feature_count(),
                    numeric,
                    ds.feature_count() - numeric,
                    ds.class_size(0),
                    ds.class_size(1)
                )
                .map_err(write_err)?;
            }
            Ok(())
        }
        Command::Explain {
            query,
            method,
            overrides,
        } => {
            let config = overrides.resolve(env_out)?;
            if config.datasets.len() != 1 {
                return Err(CliError::Usage(
                    "explain takes exactly one --dataset".into(),
                ));
            }
            let dataset = prepare_dataset(&config.datasets[0], &config)?;
            if query >= dataset.len() {
                return Err(CliError::Usage(format!(
                    "query {query} out of range (dataset has {} rows)",
                    dataset.len()
                )));
            }
            let config = RunConfig {
                methods: vec![method],
                ..config
            };
            let ctx = LooContext::new(&dataset, &config)?;
            let row = ctx.run_method(query, method);
            let explanation = Explanation {
                dataset: dataset.name(),
                query: dataset.instance(query),
                row: &row,
            };
            let json = serde_json::to_string_pretty(&explanation)
                .map_err(|e| HarnessError::Serialize(e.to_string()))?;
            writeln!(out, "{json}").map_err(write_err)
        }
        Command::Bench(overrides) => {
            let config = overrides.resolve(env_out)?;
            let mut runs = Vec::with_capacity(config.datasets.len());
            for path in &config.datasets {
                let dataset = prepare_dataset(path, &config)?;
                eprintln!("running {} ({} rows)", dataset.name(), dataset.len());
                runs.push(run_loo(&dataset, &config)?);
            }
            let summaries: Vec<_> = runs.iter().map(summarize).collect();
            let table = mean_ranks(&summaries).map_err(HarnessError::from)?;
            let files = emit_report(&runs, &summaries, &table, &config)?;
            writeln!(out, "report written to {}", files.dir.display()).map_err(write_err)?;
            writeln!(out, "mean ranks ({} datasets):", table.datasets.len()).map_err(write_err)?;
            write!(out, "{:<20}", "metric").map_err(write_err)?;
            for m in &table.methods {
                write!(out, " {:>12}", m.as_str()).map_err(write_err)?;
            }
            writeln!(out).map_err(write_err)?;
            for (k, metric) in Metric::ALL.iter().enumerate() {
                write!(out, "{:<20}", metric.as_str()).map_err(write_err)?;
                for r in &table.mean[k] {
                    write!(out, " {r:>12.2}").map_err(write_err)?;
                }
                writeln!(out).map_err(write_err)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Explanation<'a> {
    dataset: &'a str,
    query: &'a Instance,
    #[serde(flatten)]
    row: &'a ResultRow,
}
