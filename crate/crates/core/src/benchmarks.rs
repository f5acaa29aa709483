//! Benchmark weighting schemes: equal weight, market-cap weight, and
//! inverse volatility.
//!
//! Each constructor emits a full-universe [`WeightVector`] on the simplex.
//! Inverse volatility estimates each stock's standard deviation over a
//! trailing window that ends the day before the requested date, so weights
//! never see data from the date they apply to.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::panel::{MarketCapPanel, ReturnsPanel};

/// Absolute tolerance on the simplex constraints.
pub const WEIGHT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkKind {
    EqualWeight,
    MarketCap,
    InverseVolatility,
}

impl BenchmarkKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::EqualWeight => "equalweight",
            BenchmarkKind::MarketCap => "marketcap",
            BenchmarkKind::InverseVolatility => "inversevol",
        }
    }
}

/// A benchmark scheme plus the trailing window (trading days) used by the
/// inverse-volatility estimator; the other two schemes ignore it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkSpec {
    pub kind: BenchmarkKind,
    pub window: usize,
}

impl BenchmarkSpec {
    pub fn new(kind: BenchmarkKind, window: usize) -> Result<Self> {
        if kind == BenchmarkKind::InverseVolatility && window < 2 {
            return Err(Error::Invalid(alloc::format!(
                "inverse-volatility window {window} below minimum 2"
            )));
        }
        Ok(Self { kind, window })
    }
}

/// Full-universe portfolio weights: non-negative and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    asof: Option<String>,
}

impl WeightVector {
    /// Validates the simplex invariants. Entries within [`WEIGHT_TOL`]
    /// below zero are clamped to exactly zero first.
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        for w in &mut weights {
            if *w < 0.0 && *w >= -WEIGHT_TOL {
                *w = 0.0;
            }
        }
        if let Some(w) = weights.iter().find(|w| **w < 0.0) {
            return Err(Error::Invalid(alloc::format!("negative weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Invalid(alloc::format!(
                "weights sum to {sum}, not 1"
            )));
        }
        Ok(Self {
            weights,
            asof: None,
        })
    }

    pub fn stamped(mut self, asof: &str) -> Self {
        self.asof = Some(asof.to_string());
        self
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn asof(&self) -> Option<&str> {
        self.asof.as_deref()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Total weight sitting outside the given sorted support.
    pub fn off_support_mass(&self, support: &[usize]) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(i, _)| support.binary_search(i).is_err())
            .map(|(_, w)| *w)
            .sum()
    }
}

/// `1/n` on every stock.
pub fn equal_weight(n: usize) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::Invalid("empty universe".to_string()));
    }
    WeightVector::new(alloc::vec![1.0 / n as f64; n])
}

/// Weights proportional to market capitalization at the most recent cap
/// observation at or before `asof`.
pub fn market_cap_weight(caps: &MarketCapPanel, asof: &str) -> Result<WeightVector> {
    let row = caps.resolve_asof(asof)?;
    let total: f64 = caps.caps().row(row).iter().sum();
    let weights = caps.caps().row(row).iter().map(|v| v / total).collect();
    Ok(WeightVector::new(weights)?.stamped(asof))
}

/// Weights proportional to inverse volatility over the trailing `window`
/// return rows strictly before `asof`.
pub fn inverse_vol_weight(
    returns: &ReturnsPanel,
    asof: &str,
    window: usize,
) -> Result<WeightVector> {
    if window < 2 {
        return Err(Error::Invalid(alloc::format!(
            "volatility window {window} below minimum 2"
        )));
    }
    let available = returns.rows_before(asof);
    if available < window {
        return Err(Error::BurnIn {
            asof: asof.to_string(),
            required: window,
            available,
        });
    }
    let tail = returns.slice(available - window, available);
    let m = tail.returns();
    let mut inv = Vec::with_capacity(returns.n_stocks());
    for c in 0..m.cols() {
        let mean = m.column(c).sum::<f64>() / window as f64;
        let var = m.column(c).map(|r| (r - mean) * (r - mean)).sum::<f64>()
            / (window - 1) as f64;
        if var <= 0.0 {
            return Err(Error::DegenerateInput(returns.tickers()[c].clone()));
        }
        inv.push(1.0 / var.sqrt());
    }
    let total: f64 = inv.iter().sum();
    let weights = inv.into_iter().map(|v| v / total).collect();
    Ok(WeightVector::new(weights)?.stamped(asof))
}

/// Benchmark weights at a rebalance date under the given spec.
pub fn benchmark_weight(
    spec: &BenchmarkSpec,
    returns: &ReturnsPanel,
    caps: &MarketCapPanel,
    asof: &str,
) -> Result<WeightVector> {
    match spec.kind {
        BenchmarkKind::EqualWeight => Ok(equal_weight(returns.n_stocks())?.stamped(asof)),
        BenchmarkKind::MarketCap => market_cap_weight(caps, asof),
        BenchmarkKind::InverseVolatility => inverse_vol_weight(returns, asof, spec.window),
    }
}
