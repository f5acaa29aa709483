//! Experiment grid runner: ingest or generate data, cluster per `k`, run
//! every (benchmark, method, k, frequency) cell, and write the report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use anyhow::{bail, Context, Result};
use sparsetrack_core::backtest::{
    build_schedule, run_cell, CellConfig, CellResult, Frequency, Method,
};
use sparsetrack_core::benchmarks::{BenchmarkKind, BenchmarkSpec};
use sparsetrack_core::clustering::{
    solve_exact, solve_lagrangian, ClusterProblem, ClusterSolution, DEFAULT_EXACT_CAP,
    DEFAULT_GAP_TOL, DEFAULT_MAX_ITERS,
};
use sparsetrack_core::panel::{
    compute_returns, market_caps, split_index, MarketCapPanel, PricePanel, ReturnsPanel,
    SplitSpec,
};
use sparsetrack_core::similarity::correlation;
use sparsetrack_core::synthetic::{generate, SyntheticConfig};

use crate::config::ExperimentConfig;
use crate::csvio;

pub struct PreparedData {
    pub panel: PricePanel,
    pub returns: ReturnsPanel,
    pub caps: MarketCapPanel,
    pub test_start: usize,
    pub clusters: BTreeMap<usize, ClusterSolution>,
}

#[derive(Debug, Clone, Copy)]
struct CellSpec {
    benchmark: BenchmarkKind,
    method: Method,
    k: usize,
    frequency: Frequency,
}

impl CellSpec {
    fn name(&self) -> String {
        format!(
            "{}_{}_k{}_{}",
            self.benchmark.name(),
            self.method.name(),
            self.k,
            self.frequency.name()
        )
    }
}

struct CellOutcome {
    spec: CellSpec,
    tracking_error: f64,
    mean_turnover: f64,
}

/// Loads or generates the panel, derives returns and caps, splits, and
/// solves the clustering once per `k` on the training window.
pub fn prepare(config: &ExperimentConfig) -> Result<PreparedData> {
    let panel = if config.synthetic {
        generate(&SyntheticConfig::new(
            config.synthetic_stocks,
            config.synthetic_days,
            config.seed,
        ))
        .context("synthetic data generation")?
    } else {
        csvio::load_panel(
            config.prices_path.as_ref().expect("validated"),
            config.shares_path.as_ref().expect("validated"),
        )
        .context("data ingestion")?
    };

    let returns = compute_returns(&panel).context("return computation")?;
    let caps = market_caps(&panel);
    let n = panel.n_stocks();

    // Grid sanity before any solver runs.
    if let Some(&bad) = config.k_values.iter().find(|&&k| k > n) {
        bail!("k = {bad} exceeds the {n}-stock universe");
    }

    let test_start = split_index(
        returns.rows(),
        &SplitSpec {
            train_fraction: config.train_fraction,
        },
    )
    .context("train/test split")?;

    let train = returns.slice(0, test_start);
    let rho = correlation(&train).context("similarity estimation")?;
    let mut clusters = BTreeMap::new();
    for &k in &config.k_values {
        if clusters.contains_key(&k) {
            continue;
        }
        let problem = ClusterProblem::new(rho.clone(), k).context("clustering setup")?;
        let solution = if n <= DEFAULT_EXACT_CAP {
            solve_exact(&problem).context("exact clustering")?
        } else {
            solve_lagrangian(&problem, DEFAULT_MAX_ITERS, DEFAULT_GAP_TOL).0
        };
        clusters.insert(k, solution);
    }

    Ok(PreparedData {
        panel,
        returns,
        caps,
        test_start,
        clusters,
    })
}

fn run_one_cell(
    data: &PreparedData,
    config: &ExperimentConfig,
    spec: &CellSpec,
) -> Result<CellResult> {
    let stride = spec.frequency.stride();
    let burn_in = stride.saturating_sub(data.test_start);
    let schedule = build_schedule(
        &data.returns.dates()[data.test_start..],
        spec.frequency,
        burn_in,
    )?;
    let mut cell_cfg = CellConfig::new(
        BenchmarkSpec::new(spec.benchmark, stride)?,
        spec.method,
    );
    cell_cfg.turnover_bound = config.turnover_bound;
    cell_cfg.recluster = config.recluster;
    let cluster = &data.clusters[&spec.k];
    Ok(run_cell(
        &data.returns,
        &data.caps,
        cluster,
        &schedule,
        data.test_start,
        &cell_cfg,
    )?)
}

fn detail_files(
    dir: &std::path::Path,
    name: &str,
    tickers: &[String],
    cell: &CellResult,
) -> Vec<(PathBuf, String)> {
    let mut diffs = String::from("date,diff\n");
    for (d, v) in cell.diff_dates.iter().zip(&cell.daily_diff_series) {
        let _ = writeln!(diffs, "{d},{v}");
    }

    let mut rebalances = String::from("date,turnover,ex_ante_te\n");
    for (i, d) in cell.rebalance_dates.iter().enumerate() {
        let t = if i == 0 {
            String::new()
        } else {
            cell.turnover_series[i - 1].to_string()
        };
        let _ = writeln!(rebalances, "{d},{t},{}", cell.ex_ante_te_series[i]);
    }

    let mut weights = String::from("date,ticker,weight\n");
    for (d, w) in cell.rebalance_dates.iter().zip(&cell.weights_by_date) {
        for (t, x) in tickers.iter().zip(w.weights()) {
            let _ = writeln!(weights, "{d},{t},{x}");
        }
    }

    vec![
        (dir.join(format!("{name}_diffs.csv")), diffs),
        (dir.join(format!("{name}_rebalances.csv")), rebalances),
        (dir.join(format!("{name}_weights.csv")), weights),
    ]
}

/// Runs the full experiment grid and writes all outputs under
/// `config.output_dir`. Cells execute in parallel up to the `jobs` cap;
/// files are written atomically per cell and the summary is assembled in
/// grid order, so outputs are byte-deterministic regardless of scheduling.
pub fn run(config: &ExperimentConfig) -> Result<()> {
    config.validate()?;
    let out = &config.output_dir;
    let cells_dir = out.join("cells");
    fs::create_dir_all(&cells_dir)
        .with_context(|| format!("creating output dir {}", cells_dir.display()))?;

    let data = prepare(config)?;
    let tickers = data.panel.tickers().to_vec();

    if config.synthetic {
        let data_dir = out.join("data");
        fs::create_dir_all(&data_dir)?;
        csvio::write_prices_csv(&data_dir.join("prices.csv"), &data.panel)?;
        csvio::write_shares_csv(&data_dir.join("shares.csv"), &data.panel)?;
    }
    for (k, solution) in &data.clusters {
        csvio::write_cluster_csv(&out.join(format!("cluster_k{k}.csv")), &tickers, solution)?;
    }

    let mut specs = Vec::new();
    for &benchmark in &config.benchmarks {
        for &method in &config.methods {
            for &k in &config.k_values {
                for &frequency in &config.frequencies {
                    specs.push(CellSpec {
                        benchmark,
                        method,
                        k,
                        frequency,
                    });
                }
            }
        }
    }

    let workers = if config.jobs == 0 {
        thread::available_parallelism().map_or(1, |p| p.get())
    } else {
        config.jobs
    }
    .min(specs.len())
    .max(1);

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<CellOutcome>>>> =
        Mutex::new((0..specs.len()).map(|_| None).collect());

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= specs.len() {
                    break;
                }
                let spec = specs[idx];
                let name = spec.name();
                let outcome = run_one_cell(&data, config, &spec)
                    .with_context(|| format!("cell {name}"))
                    .and_then(|cell| {
                        for (path, content) in detail_files(&cells_dir, &name, &tickers, &cell) {
                            csvio::write_atomic(&path, &content)?;
                        }
                        Ok(CellOutcome {
                            spec,
                            tracking_error: cell.tracking_error,
                            mean_turnover: cell.mean_turnover(),
                        })
                    });
                results.lock().unwrap()[idx] = Some(outcome);
            });
        }
    });

    let mut summary = String::from("benchmark,method,k,frequency,tracking_error,mean_turnover\n");
    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:<13} {:<10} {:>3}  {:<10} {:>15} {:>14}",
        "benchmark", "method", "k", "frequency", "tracking_error", "mean_turnover"
    );
    let collected = results.into_inner().unwrap();
    for outcome in collected {
        let o = outcome.expect("every cell visited")?;
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{}",
            o.spec.benchmark.name(),
            o.spec.method.name(),
            o.spec.k,
            o.spec.frequency.name(),
            o.tracking_error,
            o.mean_turnover
        );
        let _ = writeln!(
            table,
            "{:<13} {:<10} {:>3}  {:<10} {:>15.6} {:>14.6}",
            o.spec.benchmark.name(),
            o.spec.method.name(),
            o.spec.k,
            o.spec.frequency.name(),
            o.tracking_error,
            o.mean_turnover
        );
    }
    csvio::write_atomic(&out.join("summary.csv"), &summary)?;
    csvio::write_atomic(&out.join("config.txt"), &config.to_config_string())?;

    println!(
        "universe: {} stocks, {} dates ({} train / {} test return rows)",
        data.panel.n_stocks(),
        data.panel.dates().len(),
        data.test_start,
        data.returns.rows() - data.test_start
    );
    println!("{table}");
    println!("report written to {}", out.join("summary.csv").display());
    Ok(())
}
