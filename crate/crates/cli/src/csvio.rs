//! CSV ingestion and output.
//!
//! Input schema: a header row `date,<ticker1>,<ticker2>,...` and one row
//! per date; prices are daily, shares outstanding may be quarterly. Cells
//! may be empty (missing observation). All numbers use `.` decimals and
//! are written back with shortest-round-trip formatting, so a written
//! panel reloads bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sparsetrack_core::benchmarks::WeightVector;
use sparsetrack_core::clustering::ClusterSolution;
use sparsetrack_core::panel::{align_panel, PricePanel, RawTable};

/// Reads a `date,<tickers...>` table; empty cells become `None`.
pub fn read_table(path: &Path) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;

    let headers = reader.headers().context("reading header row")?.clone();
    if headers.is_empty() || headers.get(0).map(str::to_ascii_lowercase).as_deref() != Some("date")
    {
        bail!(
            "{}: first header column must be 'date', got '{}'",
            path.display(),
            headers.get(0).unwrap_or("")
        );
    }
    let tickers: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if tickers.is_empty() {
        bail!("{}: no ticker columns", path.display());
    }

    let mut dates = Vec::new();
    let mut cells = Vec::new();
    for (ri, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: row {}", path.display(), ri + 2))?;
        if record.len() != tickers.len() + 1 {
            bail!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                ri + 2,
                record.len(),
                tickers.len() + 1
            );
        }
        dates.push(record[0].to_string());
        let mut row = Vec::with_capacity(tickers.len());
        for (ci, field) in record.iter().skip(1).enumerate() {
            if field.is_empty() {
                row.push(None);
            } else {
                let v: f64 = field.parse().with_context(|| {
                    format!(
                        "{}: row {}, column {} ({}): invalid number '{}'",
                        path.display(),
                        ri + 2,
                        ci + 2,
                        tickers[ci],
                        field
                    )
                })?;
                row.push(Some(v));
            }
        }
        cells.push(row);
    }
    Ok(RawTable {
        dates,
        tickers,
        cells,
    })
}

/// Loads and aligns the price and shares files into a panel.
pub fn load_panel(prices_path: &Path, shares_path: &Path) -> Result<PricePanel> {
    let prices = read_table(prices_path)?;
    let shares = read_table(shares_path)?;
    Ok(align_panel(&prices, &shares)?)
}

/// Writes content atomically: a temp file in the same directory, then a
/// rename over the target.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(content.as_bytes())?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn grid_csv(dates: &[String], tickers: &[String], cell: impl Fn(usize, usize) -> f64) -> String {
    let mut out = String::from("date");
    for t in tickers {
        out.push(',');
        out.push_str(t);
    }
    out.push('\n');
    for (r, d) in dates.iter().enumerate() {
        out.push_str(d);
        for c in 0..tickers.len() {
            out.push(',');
            out.push_str(&cell(r, c).to_string());
        }
        out.push('\n');
    }
    out
}

pub fn write_prices_csv(path: &Path, panel: &PricePanel) -> Result<()> {
    write_atomic(
        path,
        &grid_csv(panel.dates(), panel.tickers(), |r, c| panel.prices()[(r, c)]),
    )
}

pub fn write_shares_csv(path: &Path, panel: &PricePanel) -> Result<()> {
    write_atomic(
        path,
        &grid_csv(panel.dates(), panel.tickers(), |r, c| panel.shares()[(r, c)]),
    )
}

/// `ticker,weight` rows for one weight vector.
pub fn weight_csv(tickers: &[String], w: &WeightVector) -> String {
    let mut out = String::from("ticker,weight\n");
    for (t, x) in tickers.iter().zip(w.weights()) {
        out.push_str(t);
        out.push(',');
        out.push_str(&x.to_string());
        out.push('\n');
    }
    out
}

pub fn write_weight_csv(path: &Path, tickers: &[String], w: &WeightVector) -> Result<()> {
    write_atomic(path, &weight_csv(tickers, w))
}

/// `stock,representative` rows for a clustering solution.
pub fn cluster_csv(tickers: &[String], solution: &ClusterSolution) -> String {
    let mut out = String::from("stock,representative\n");
    for (i, &rep) in solution.assignment().iter().enumerate() {
        out.push_str(&tickers[i]);
        out.push(',');
        out.push_str(&tickers[rep]);
        out.push('\n');
    }
    out
}

pub fn write_cluster_csv(path: &Path, tickers: &[String], solution: &ClusterSolution) -> Result<()> {
    write_atomic(path, &cluster_csv(tickers, solution))
}
