//! Price, return, and market-capitalization panels.
//!
//! A [`PricePanel`] is a dense date-by-stock grid of positive closing prices
//! together with a forward-filled shares-outstanding grid of the same shape.
//! Dates are opaque ISO-8601 strings ordered lexicographically, which for
//! that format coincides with calendar order; none of the panel logic needs
//! calendar arithmetic beyond ordering.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Minimum aligned history accepted at ingestion.
pub const MIN_DATES: usize = 3;

/// A raw date-by-ticker table as parsed from a CSV file, before alignment.
/// `cells[row][col]` is `None` where the source had no observation.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub dates: Vec<String>,
    pub tickers: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

impl RawTable {
    fn validate_shape(&self, what: &str) -> Result<()> {
        if self.cells.len() != self.dates.len() {
            return Err(Error::Invalid(format!(
                "{what}: {} rows but {} dates",
                self.cells.len(),
                self.dates.len()
            )));
        }
        for (i, row) in self.cells.iter().enumerate() {
            if row.len() != self.tickers.len() {
                return Err(Error::Invalid(format!(
                    "{what}: row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    self.tickers.len()
                )));
            }
        }
        for w in self.dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid(format!(
                    "{what}: dates not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

/// Aligned panel of daily closing prices and shares outstanding.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<String>,
    tickers: Vec<String>,
    prices: Matrix,
    shares: Matrix,
}

impl PricePanel {
    /// Validates the full set of panel invariants and takes ownership.
    pub fn new(
        dates: Vec<String>,
        tickers: Vec<String>,
        prices: Matrix,
        shares: Matrix,
    ) -> Result<Self> {
        if prices.rows() != dates.len()
            || shares.rows() != dates.len()
            || prices.cols() != tickers.len()
            || shares.cols() != tickers.len()
        {
            return Err(Error::Invalid("panel shapes disagree".to_string()));
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid(format!(
                    "dates not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        for r in 0..dates.len() {
            for c in 0..tickers.len() {
                if prices[(r, c)].is_nan() || prices[(r, c)] <= 0.0 {
                    return Err(Error::InvalidValue {
                        date: dates[r].clone(),
                        ticker: tickers[c].clone(),
                        reason: format!("non-positive price {}", prices[(r, c)]),
                    });
                }
                if shares[(r, c)].is_nan() || shares[(r, c)] <= 0.0 {
                    return Err(Error::InvalidValue {
                        date: dates[r].clone(),
                        ticker: tickers[c].clone(),
                        reason: format!("non-positive shares outstanding {}", shares[(r, c)]),
                    });
                }
            }
        }
        Ok(Self {
            dates,
            tickers,
            prices,
            shares,
        })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn prices(&self) -> &Matrix {
        &self.prices
    }

    pub fn shares(&self) -> &Matrix {
        &self.shares
    }

    pub fn n_stocks(&self) -> usize {
        self.tickers.len()
    }
}

/// Joins raw price and shares tables into an aligned [`PricePanel`].
///
/// Dates with any missing price are dropped wholesale. Quarterly shares
/// observations are joined to the surviving daily dates by forward-fill
/// from the most recent prior observation; rows before the first
/// observation fall back to the first one. Tickers present in prices but
/// absent from shares are rejected.
pub fn align_panel(prices: &RawTable, shares: &RawTable) -> Result<PricePanel> {
    prices.validate_shape("prices")?;
    shares.validate_shape("shares")?;

    // Locate each price ticker inside the shares table (superset allowed).
    let mut share_col = Vec::with_capacity(prices.tickers.len());
    for t in &prices.tickers {
        match shares.tickers.iter().position(|s| s == t) {
            Some(c) => share_col.push(c),
            None => return Err(Error::MissingTicker(t.clone())),
        }
    }

    // Keep only dates where every price is observed.
    let kept: Vec<usize> = (0..prices.dates.len())
        .filter(|&r| prices.cells[r].iter().all(Option::is_some))
        .collect();
    if kept.len() < MIN_DATES {
        return Err(Error::InsufficientData {
            context: "aligned price history",
            required: MIN_DATES,
            actual: kept.len(),
        });
    }

    let n = prices.tickers.len();
    let mut price_mat = Matrix::zeros(kept.len(), n);
    for (out_r, &r) in kept.iter().enumerate() {
        for c in 0..n {
            price_mat[(out_r, c)] = prices.cells[r][c].unwrap();
        }
    }

    // Per-ticker observation list, then forward-fill onto the kept dates.
    let mut shares_mat = Matrix::zeros(kept.len(), n);
    for c in 0..n {
        let sc = share_col[c];
        let obs: Vec<(usize, f64)> = (0..shares.dates.len())
            .filter_map(|r| shares.cells[r][sc].map(|v| (r, v)))
            .collect();
        if obs.is_empty() {
            return Err(Error::MissingTicker(prices.tickers[c].clone()));
        }
        for (out_r, &r) in kept.iter().enumerate() {
            let date = &prices.dates[r];
            // Most recent observation at or before `date`; before the first
            // observation, use the first (backward fill on the leading stub).
            let mut chosen = obs[0].1;
            for &(or, v) in &obs {
                if shares.dates[or] <= *date {
                    chosen = v;
                } else {
                    break;
                }
            }
            shares_mat[(out_r, c)] = chosen;
        }
    }

    let dates: Vec<String> = kept.iter().map(|&r| prices.dates[r].clone()).collect();
    PricePanel::new(dates, prices.tickers.clone(), price_mat, shares_mat)
}

/// Dense panel of simple daily returns, one row shorter than its source.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsPanel {
    dates: Vec<String>,
    tickers: Vec<String>,
    returns: Matrix,
}

impl ReturnsPanel {
    pub fn from_parts(dates: Vec<String>, tickers: Vec<String>, returns: Matrix) -> Result<Self> {
        if returns.rows() != dates.len() || returns.cols() != tickers.len() {
            return Err(Error::Invalid("returns shape disagrees".to_string()));
        }
        Ok(Self {
            dates,
            tickers,
            returns,
        })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn returns(&self) -> &Matrix {
        &self.returns
    }

    pub fn rows(&self) -> usize {
        self.returns.rows()
    }

    pub fn n_stocks(&self) -> usize {
        self.tickers.len()
    }

    /// Number of return rows dated strictly before `asof`.
    pub fn rows_before(&self, asof: &str) -> usize {
        self.dates.partition_point(|d| d.as_str() < asof)
    }

    /// Copy of the row range `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> ReturnsPanel {
        let mut m = Matrix::zeros(end - start, self.n_stocks());
        for r in start..end {
            m.row_mut(r - start).copy_from_slice(self.returns.row(r));
        }
        ReturnsPanel {
            dates: self.dates[start..end].to_vec(),
            tickers: self.tickers.clone(),
            returns: m,
        }
    }
}

/// Simple returns `r_t = p_{t+1}/p_t - 1`, one row per consecutive date pair.
pub fn compute_returns(panel: &PricePanel) -> Result<ReturnsPanel> {
    let t = panel.dates().len();
    if t < 2 {
        return Err(Error::InsufficientData {
            context: "return computation",
            required: 2,
            actual: t,
        });
    }
    let n = panel.n_stocks();
    let mut m = Matrix::zeros(t - 1, n);
    for r in 0..t - 1 {
        for c in 0..n {
            m[(r, c)] = panel.prices()[(r + 1, c)] / panel.prices()[(r, c)] - 1.0;
        }
    }
    ReturnsPanel::from_parts(panel.dates()[1..].to_vec(), panel.tickers().to_vec(), m)
}

/// Market capitalizations: prices times shares outstanding, elementwise.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketCapPanel {
    dates: Vec<String>,
    tickers: Vec<String>,
    caps: Matrix,
}

impl MarketCapPanel {
    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn caps(&self) -> &Matrix {
        &self.caps
    }

    pub fn n_stocks(&self) -> usize {
        self.tickers.len()
    }

    /// Index of the most recent row dated at or before `asof`.
    pub fn resolve_asof(&self, asof: &str) -> Result<usize> {
        let pos = self.dates.partition_point(|d| d.as_str() <= asof);
        if pos == 0 {
            return Err(Error::NoData(asof.to_string()));
        }
        Ok(pos - 1)
    }
}

pub fn market_caps(panel: &PricePanel) -> MarketCapPanel {
    let (t, n) = (panel.dates().len(), panel.n_stocks());
    let mut caps = Matrix::zeros(t, n);
    for r in 0..t {
        for c in 0..n {
            caps[(r, c)] = panel.prices()[(r, c)] * panel.shares()[(r, c)];
        }
    }
    MarketCapPanel {
        dates: panel.dates().to_vec(),
        tickers: panel.tickers().to_vec(),
        caps,
    }
}

/// Train/test split fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.65,
        }
    }
}

/// Row index where the test window starts under `spec`, after checking
/// that both sides keep at least two rows.
pub fn split_index(rows: usize, spec: &SplitSpec) -> Result<usize> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Invalid(format!(
            "train_fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    let idx = (spec.train_fraction * rows as f64) as usize;
    if idx < 2 || rows - idx < 2 {
        return Err(Error::InsufficientData {
            context: "train/test split",
            required: 4,
            actual: rows,
        });
    }
    Ok(idx)
}

/// Splits a returns panel into leading train and trailing test panels.
pub fn split(returns: &ReturnsPanel, spec: &SplitSpec) -> Result<(ReturnsPanel, ReturnsPanel)> {
    let idx = split_index(returns.rows(), spec)?;
    Ok((
        returns.slice(0, idx),
        returns.slice(idx, returns.rows()),
    ))
}
