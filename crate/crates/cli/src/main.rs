//! `rulelist`: mine rules, fit Bayesian rule lists, evaluate and render
//! them, and time the miners on synthetic data.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rulelist::dataset::Bins;

#[derive(Parser, Debug)]
#[command(
    name = "rulelist",
    version,
    about = "Interpretable rule-list classifiers for categorical data"
)]
pub struct Cli {
    /// Plain-text `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for miners and chains (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for folds and chains.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Name of the label column.
    #[arg(long)]
    pub label: Option<String>,
    /// Quantize a numeric column into 2 or 3 bins, as `column:2`. Repeatable.
    #[arg(long = "bins", value_parser = parse_bins)]
    pub bins: Vec<(String, Bins)>,
    /// Treat empty attribute cells as their own category.
    #[arg(long)]
    pub missing_as_category: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct MinerArgs {
    /// Mining strategy: `mca` or `apriori`.
    #[arg(long)]
    pub algo: Option<String>,
    /// Maximum literals per rule.
    #[arg(long)]
    pub r_max: Option<usize>,
    /// Minimum support within the label class.
    #[arg(long)]
    pub s_min: Option<f64>,
    /// Minimum rule score.
    #[arg(long)]
    pub mu_min: Option<f64>,
    /// Rules kept per label.
    #[arg(long)]
    pub top: Option<usize>,
    /// Keep only this many MCA components.
    #[arg(long)]
    pub components: Option<usize>,
    /// Score literals by the absolute cosine.
    #[arg(long)]
    pub unsigned: bool,
    /// Give up mining after this many seconds.
    #[arg(long)]
    pub max_seconds: Option<f64>,
    /// Give up when a level generates more candidates than this.
    #[arg(long)]
    pub max_candidates: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct BrlArgs {
    /// Number of chains.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Prior expected list length.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Prior expected rule cardinality.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Dirichlet pseudo-counts, comma separated, one per label.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Iteration cap per chain.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Iterations between convergence checks.
    #[arg(long)]
    pub check_interval: Option<usize>,
    /// Stop once R-hat is at most this value.
    #[arg(long)]
    pub rhat: Option<f64>,
    /// Longest list the prior allows.
    #[arg(long)]
    pub max_list_len: Option<usize>,
    /// Keep every n-th chain state.
    #[arg(long)]
    pub thin: Option<usize>,
    /// Run chains one after another.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mine candidate rules and write them as JSON.
    Mine {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        miner: MinerArgs,
        #[arg(long, default_value = "rules.json")]
        out: PathBuf,
    },
    /// Fit a rule list over mined rules.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        brl: BrlArgs,
        /// Rules written by `mine`.
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, default_value = "model.json")]
        out: PathBuf,
    },
    /// Write per-row label probabilities for a CSV file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        missing_as_category: bool,
        /// Output CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a fitted model, or cross-validate the whole pipeline with `--cv`.
    Evaluate {
        #[arg(long, conflicts_with = "cv")]
        model: Option<PathBuf>,
        /// Number of stratified folds.
        #[arg(long)]
        cv: Option<usize>,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        miner: MinerArgs,
        #[command(flatten)]
        brl: BrlArgs,
        /// Metrics CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a fitted model as if / else if / else text.
    Render {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the miners on synthetic data of growing width.
    Benchmark {
        #[command(flatten)]
        miner: MinerArgs,
        /// Attribute counts to try.
        #[arg(long, value_delimiter = ',', default_value = "10,25,50,100")]
        attributes: Vec<usize>,
        #[arg(long, default_value_t = 500)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        categories: usize,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        /// Share of attributes correlated with the label.
        #[arg(long, default_value_t = 0.2)]
        signal_fraction: f64,
        /// Probability that a signal attribute follows the label.
        #[arg(long, default_value_t = 0.6)]
        signal_strength: f64,
        /// Miners to time, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "mca,apriori")]
        miners: Vec<String>,
        #[arg(long, default_value = "bench.csv")]
        out: PathBuf,
    },
}

fn parse_bins(s: &str) -> Result<(String, Bins), String> {
    let (column, n) = s
        .rsplit_once(':')
        .ok_or_else(|| format!("expected column:2 or column:3, got `{s}`"))?;
    let n: usize = n
        .parse()
        .map_err(|_| format!("bin count `{n}` is not a number"))?;
    let bins = Bins::try_from(n).map_err(|e| e.to_string())?;
    Ok((column.to_string(), bins))
}

/// Exit codes: 1 usage, 2 data, 3 non-convergence.
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 1,
            error: error.into(),
        }
    }

    pub fn data(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 2,
            error: error.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
