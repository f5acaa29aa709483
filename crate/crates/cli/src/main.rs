//! Command-line entry point: run the tracking experiment grid from a
//! config file, with every config key overridable by a flag.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sparsetrack_cli::config::{parse_benchmark, parse_frequency, parse_method, ExperimentConfig};
use sparsetrack_cli::runner;

/// Sparse index-tracking portfolios: cluster a stock universe, weight the
/// representatives, and backtest against benchmark weighting schemes.
#[derive(Debug, Parser)]
#[command(name = "sparsetrack", version)]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Generate a seeded synthetic market instead of reading CSVs.
    #[arg(long)]
    synthetic: bool,

    /// Seed for the synthetic market generator.
    #[arg(long)]
    seed: Option<u64>,

    /// Parallel cell workers (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,

    /// Output directory.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,

    /// Daily prices CSV (header: date,<tickers...>).
    #[arg(long)]
    prices_path: Option<PathBuf>,

    /// Quarterly shares-outstanding CSV (same header layout).
    #[arg(long)]
    shares_path: Option<PathBuf>,

    /// Stocks in the synthetic universe.
    #[arg(long)]
    synthetic_stocks: Option<usize>,

    /// Trading days in the synthetic history.
    #[arg(long)]
    synthetic_days: Option<usize>,

    /// Leading fraction of return rows used for calibration.
    #[arg(long)]
    train_fraction: Option<f64>,

    /// Representative counts, comma-separated (e.g. 5,10,20).
    #[arg(long, value_delimiter = ',')]
    k_values: Option<Vec<usize>>,

    /// Rebalancing frequencies: quarterly, semiannual, annual.
    #[arg(long, value_delimiter = ',')]
    frequencies: Option<Vec<String>>,

    /// Benchmarks: equalweight, marketcap, inversevol.
    #[arg(long, value_delimiter = ',')]
    benchmarks: Option<Vec<String>>,

    /// Weighting methods: heuristic, qp.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,

    /// L1 turnover budget per rebalance for the QP method.
    #[arg(long)]
    turnover_bound: Option<f64>,

    /// Re-solve the clustering at every rebalance.
    #[arg(long)]
    recluster: bool,
}

fn build_config(cli: Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if cli.synthetic {
        cfg.synthetic = true;
    }
    if cli.recluster {
        cfg.recluster = true;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = cli.output {
        cfg.output_dir = v;
    }
    if let Some(v) = cli.prices_path {
        cfg.prices_path = Some(v);
    }
    if let Some(v) = cli.shares_path {
        cfg.shares_path = Some(v);
    }
    if let Some(v) = cli.synthetic_stocks {
        cfg.synthetic_stocks = v;
    }
    if let Some(v) = cli.synthetic_days {
        cfg.synthetic_days = v;
    }
    if let Some(v) = cli.train_fraction {
        cfg.train_fraction = v;
    }
    if let Some(v) = cli.k_values {
        cfg.k_values = v;
    }
    if let Some(v) = cli.frequencies {
        cfg.frequencies = v.iter().map(|s| parse_frequency(s)).collect::<anyhow::Result<_>>()?;
    }
    if let Some(v) = cli.benchmarks {
        cfg.benchmarks = v.iter().map(|s| parse_benchmark(s)).collect::<anyhow::Result<_>>()?;
    }
    if let Some(v) = cli.methods {
        cfg.methods = v.iter().map(|s| parse_method(s)).collect::<anyhow::Result<_>>()?;
    }
    if let Some(v) = cli.turnover_bound {
        cfg.turnover_bound = v;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(cli).and_then(|cfg| runner::run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
