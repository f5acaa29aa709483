//! Rebalancing backtest over the test window.
//!
//! At each rebalance date the benchmark weights and the portfolio weights
//! (cluster-cap heuristic or tracking QP) are recomputed from data strictly
//! before that date, held fixed until the next rebalance, and the daily
//! return difference between portfolio and benchmark is accrued. A trailing
//! partial period keeps trading the last weights but triggers no rebalance.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::benchmarks::{benchmark_weight, BenchmarkSpec, WeightVector};
use crate::clustering::{self, ClusterProblem, ClusterSolution};
use crate::error::{Error, Result};
use crate::heuristic::cluster_cap_weights;
use crate::panel::{MarketCapPanel, ReturnsPanel};
use crate::qp::{self, QpProblem};
use crate::similarity::{correlation, covariance, CovarianceMatrix};

/// Trading days per year used for annualization and period strides.
pub const TRADING_DAYS_PER_YEAR: usize = 252;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frequency {
    Quarterly,
    SemiAnnual,
    Annual,
}

impl Frequency {
    /// Rebalancing period in trading days.
    pub fn stride(self) -> usize {
        match self {
            Frequency::Quarterly => 63,
            Frequency::SemiAnnual => 126,
            Frequency::Annual => 252,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Frequency::Quarterly => "quarterly",
            Frequency::SemiAnnual => "semiannual",
            Frequency::Annual => "annual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Heuristic,
    Qp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Heuristic => "heuristic",
            Method::Qp => "qp",
        }
    }
}

/// Rebalance dates inside the test window: one every full period, starting
/// after the burn-in offset.
#[derive(Debug, Clone, PartialEq)]
pub struct RebalanceSchedule {
    pub frequency: Frequency,
    /// Offsets into the test window, each the first trading day of a full
    /// period.
    pub offsets: Vec<usize>,
    pub dates: Vec<String>,
}

/// Builds the schedule over `test_dates`. A rebalance happens at offset
/// `burn_in + s * stride` only when the full period after it fits inside
/// the window; a shorter tail keeps trading the last weights.
pub fn build_schedule(
    test_dates: &[String],
    frequency: Frequency,
    burn_in: usize,
) -> Result<RebalanceSchedule> {
    let stride = frequency.stride();
    let len = test_dates.len();
    let mut offsets = Vec::new();
    let mut at = burn_in;
    while at + stride <= len {
        offsets.push(at);
        at += stride;
    }
    if offsets.is_empty() {
        return Err(Error::InsufficientData {
            context: "rebalance schedule",
            required: burn_in + stride,
            actual: len,
        });
    }
    let dates = offsets.iter().map(|&o| test_dates[o].clone()).collect();
    Ok(RebalanceSchedule {
        frequency,
        offsets,
        dates,
    })
}

/// Everything one experiment cell needs beyond the market data.
#[derive(Debug, Clone)]
pub struct CellConfig {
    pub benchmark: BenchmarkSpec,
    pub method: Method,
    pub turnover_bound: f64,
    pub qp_tol: f64,
    pub qp_max_iters: usize,
    /// Re-solve the clustering at every rebalance from all data strictly
    /// before it, instead of keeping the training-window solution.
    pub recluster: bool,
}

impl CellConfig {
    pub fn new(benchmark: BenchmarkSpec, method: Method) -> Self {
        Self {
            benchmark,
            method,
            turnover_bound: 1.0,
            qp_tol: qp::DEFAULT_QP_TOL,
            qp_max_iters: qp::DEFAULT_QP_MAX_ITERS,
            recluster: false,
        }
    }
}

/// Result of one (benchmark, method, k, frequency) cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub rebalance_dates: Vec<String>,
    /// Portfolio weights fixed at each rebalance.
    pub weights_by_date: Vec<WeightVector>,
    /// L1 turnover between consecutive rebalances (empty with one
    /// rebalance; the first rebalance has nothing to turn over from).
    pub turnover_series: Vec<f64>,
    /// Annualized ex-post tracking error: std of the daily differences.
    pub tracking_error: f64,
    /// Annualized ex-ante tracking error at each rebalance,
    /// `sqrt((x - x_b)' V (x - x_b) * 252)`.
    pub ex_ante_te_series: Vec<f64>,
    /// Daily portfolio-minus-benchmark return from the first rebalance to
    /// the end of the test window.
    pub daily_diff_series: Vec<f64>,
    pub diff_dates: Vec<String>,
}

impl CellResult {
    pub fn mean_turnover(&self) -> f64 {
        if self.turnover_series.is_empty() {
            0.0
        } else {
            self.turnover_series.iter().sum::<f64>() / self.turnover_series.len() as f64
        }
    }
}

/// Annualized standard deviation of daily return differences.
pub fn tracking_error_heuristic(daily_diffs: &[f64]) -> Result<f64> {
    let m = daily_diffs.len();
    if m < 2 {
        return Err(Error::InsufficientData {
            context: "tracking error",
            required: 2,
            actual: m,
        });
    }
    let mean = daily_diffs.iter().sum::<f64>() / m as f64;
    let var = daily_diffs
        .iter()
        .map(|d| (d - mean) * (d - mean))
        .sum::<f64>()
        / (m - 1) as f64;
    Ok(var.sqrt() * (TRADING_DAYS_PER_YEAR as f64).sqrt())
}

/// Annualized ex-ante tracking error of holding `x` against `x_b` under
/// covariance `v`.
pub fn tracking_error_optimization(
    x: &WeightVector,
    x_b: &WeightVector,
    v: &CovarianceMatrix,
) -> Result<f64> {
    if x.len() != x_b.len() {
        return Err(Error::Dimension {
            expected: x_b.len(),
            actual: x.len(),
        });
    }
    if v.n() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: v.n(),
        });
    }
    let d: Vec<f64> = x
        .weights()
        .iter()
        .zip(x_b.weights())
        .map(|(a, b)| a - b)
        .collect();
    Ok((v.quad_form(&d).max(0.0) * TRADING_DAYS_PER_YEAR as f64).sqrt())
}

/// Runs one cell: rebalances through the schedule and accrues daily
/// differences, holding both weight vectors fixed between rebalances.
///
/// `returns` and `caps` carry the full history; `test_start` is the row
/// where the test window begins. Every weight uses data strictly before
/// its rebalance date (market caps resolve to the latest observation at or
/// before it, which only involves prices up to that date).
pub fn run_cell(
    returns: &ReturnsPanel,
    caps: &MarketCapPanel,
    cluster: &ClusterSolution,
    schedule: &RebalanceSchedule,
    test_start: usize,
    cfg: &CellConfig,
) -> Result<CellResult> {
    let window = schedule.frequency.stride();
    let total_rows = returns.rows();
    let mut weights_by_date = Vec::with_capacity(schedule.offsets.len());
    let mut benchmarks_by_date = Vec::with_capacity(schedule.offsets.len());
    let mut turnover_series = Vec::new();
    let mut ex_ante = Vec::new();
    let mut previous: Option<WeightVector> = None;

    for &offset in &schedule.offsets {
        let abs = test_start + offset;
        if abs >= total_rows {
            return Err(Error::InsufficientData {
                context: "rebalance date",
                required: abs + 1,
                actual: total_rows,
            });
        }
        let date = &returns.dates()[abs];

        // Estimation uses history strictly before the rebalance date.
        let history = returns.slice(0, abs);
        let x_b = benchmark_weight(&cfg.benchmark, &history, caps, date)?;
        let v = covariance(&history, window)?;

        let solution = if cfg.recluster {
            let rho = correlation(&history)?;
            let problem = ClusterProblem::new(rho, cluster.k())?;
            if history.n_stocks() <= clustering::DEFAULT_EXACT_CAP {
                clustering::solve_exact(&problem)?
            } else {
                clustering::solve_lagrangian(
                    &problem,
                    clustering::DEFAULT_MAX_ITERS,
                    clustering::DEFAULT_GAP_TOL,
                )
                .0
            }
        } else {
            cluster.clone()
        };

        let x_p = match cfg.method {
            Method::Heuristic => cluster_cap_weights(&solution, caps, date)?,
            Method::Qp => {
                let bound = previous.as_ref().map(|_| cfg.turnover_bound);
                let problem = QpProblem::new(
                    v.clone(),
                    x_b.clone(),
                    solution.selected().to_vec(),
                    previous.clone(),
                    bound,
                )?;
                qp::solve_tracking_qp(&problem, cfg.qp_tol, cfg.qp_max_iters)?.weights
            }
        };

        if let Some(prev) = &previous {
            turnover_series.push(qp::turnover(&x_p, prev)?);
        }
        ex_ante.push(tracking_error_optimization(&x_p, &x_b, &v)?);
        previous = Some(x_p.clone());
        weights_by_date.push(x_p);
        benchmarks_by_date.push(x_b);
    }

    // Accrue daily differences from the first rebalance to the end of the
    // test window, stepping weights at each subsequent rebalance.
    let first_abs = test_start + schedule.offsets[0];
    let mut daily = Vec::with_capacity(total_rows - first_abs);
    let mut diff_dates = Vec::with_capacity(total_rows - first_abs);
    let mut current = 0usize;
    for row in first_abs..total_rows {
        while current + 1 < schedule.offsets.len()
            && row >= test_start + schedule.offsets[current + 1]
        {
            current += 1;
        }
        let w_p = weights_by_date[current].weights();
        let w_b = benchmarks_by_date[current].weights();
        let r = returns.returns().row(row);
        let diff: f64 = (0..returns.n_stocks())
            .map(|i| (w_p[i] - w_b[i]) * r[i])
            .sum();
        daily.push(diff);
        diff_dates.push(returns.dates()[row].clone());
    }

    let tracking_error = tracking_error_heuristic(&daily)?;
    Ok(CellResult {
        rebalance_dates: schedule.dates.clone(),
        weights_by_date,
        turnover_series,
        tracking_error,
        ex_ante_te_series: ex_ante,
        daily_diff_series: daily,
        diff_dates,
    })
}
