//! Experiment configuration: a flat `key = value` file, with every key
//! overridable by a command-line flag of the same name.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sparsetrack_core::backtest::{Frequency, Method};
use sparsetrack_core::benchmarks::BenchmarkKind;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub prices_path: Option<PathBuf>,
    pub shares_path: Option<PathBuf>,
    pub synthetic: bool,
    pub synthetic_stocks: usize,
    pub synthetic_days: usize,
    pub train_fraction: f64,
    pub k_values: Vec<usize>,
    pub frequencies: Vec<Frequency>,
    pub benchmarks: Vec<BenchmarkKind>,
    pub methods: Vec<Method>,
    pub turnover_bound: f64,
    pub seed: u64,
    pub jobs: usize,
    pub recluster: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            prices_path: None,
            shares_path: None,
            synthetic: false,
            synthetic_stocks: 40,
            synthetic_days: 1260,
            train_fraction: 0.65,
            k_values: vec![5, 10, 20],
            frequencies: vec![
                Frequency::Quarterly,
                Frequency::SemiAnnual,
                Frequency::Annual,
            ],
            benchmarks: vec![
                BenchmarkKind::EqualWeight,
                BenchmarkKind::MarketCap,
                BenchmarkKind::InverseVolatility,
            ],
            methods: vec![Method::Heuristic, Method::Qp],
            turnover_bound: 1.0,
            seed: 42,
            jobs: 0,
            recluster: false,
            output_dir: PathBuf::from("out"),
        }
    }
}

pub fn parse_frequency(s: &str) -> Result<Frequency> {
    match s.trim().to_ascii_lowercase().as_str() {
        "quarterly" => Ok(Frequency::Quarterly),
        "semiannual" | "semi-annual" => Ok(Frequency::SemiAnnual),
        "annual" | "yearly" => Ok(Frequency::Annual),
        other => bail!("unknown frequency '{other}' (quarterly, semiannual, annual)"),
    }
}

pub fn parse_benchmark(s: &str) -> Result<BenchmarkKind> {
    match s.trim().to_ascii_lowercase().as_str() {
        "equalweight" | "equal-weight" | "ew" => Ok(BenchmarkKind::EqualWeight),
        "marketcap" | "market-cap" | "mc" => Ok(BenchmarkKind::MarketCap),
        "inversevol" | "inverse-volatility" | "iv" => Ok(BenchmarkKind::InverseVolatility),
        other => bail!("unknown benchmark '{other}' (equalweight, marketcap, inversevol)"),
    }
}

pub fn parse_method(s: &str) -> Result<Method> {
    match s.trim().to_ascii_lowercase().as_str() {
        "heuristic" => Ok(Method::Heuristic),
        "qp" | "optimization" => Ok(Method::Qp),
        other => bail!("unknown method '{other}' (heuristic, qp)"),
    }
}

fn parse_list<T>(value: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(f)
        .collect()
}

impl ExperimentConfig {
    /// Reads a flat config file on top of the defaults. Lines are
    /// `key = value`; `#` starts a comment; list values are
    /// comma-separated.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected key = value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value)
                .with_context(|| format!("config line {}", lineno + 1))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "prices_path" => self.prices_path = Some(PathBuf::from(value)),
            "shares_path" => self.shares_path = Some(PathBuf::from(value)),
            "synthetic" => self.synthetic = value.parse().context("synthetic")?,
            "synthetic_stocks" => {
                self.synthetic_stocks = value.parse().context("synthetic_stocks")?
            }
            "synthetic_days" => self.synthetic_days = value.parse().context("synthetic_days")?,
            "train_fraction" => self.train_fraction = value.parse().context("train_fraction")?,
            "k_values" => self.k_values = parse_list(value, |s| Ok(s.trim().parse()?))?,
            "frequencies" => self.frequencies = parse_list(value, parse_frequency)?,
            "benchmarks" => self.benchmarks = parse_list(value, parse_benchmark)?,
            "methods" => self.methods = parse_list(value, parse_method)?,
            "turnover_bound" => self.turnover_bound = value.parse().context("turnover_bound")?,
            "seed" => self.seed = value.parse().context("seed")?,
            "jobs" => self.jobs = value.parse().context("jobs")?,
            "recluster" => self.recluster = value.parse().context("recluster")?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            other => bail!("unknown config key '{other}'"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.synthetic && (self.prices_path.is_none() || self.shares_path.is_none()) {
            bail!("either set synthetic = true or provide prices_path and shares_path");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            bail!("train_fraction {} outside (0, 1)", self.train_fraction);
        }
        if self.k_values.is_empty()
            || self.frequencies.is_empty()
            || self.benchmarks.is_empty()
            || self.methods.is_empty()
        {
            bail!("k_values, frequencies, benchmarks, and methods must be non-empty");
        }
        if self.k_values.contains(&0) {
            bail!("k_values must be positive");
        }
        if self.turnover_bound <= 0.0 {
            bail!("turnover_bound {} must be positive", self.turnover_bound);
        }
        Ok(())
    }

    /// Serializes the experiment definition. Runtime-only settings
    /// (`output_dir`, `jobs`) are omitted so a rerun from this file into a
    /// fresh directory reproduces the outputs byte for byte.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# sparsetrack experiment configuration");
        if let Some(p) = &self.prices_path {
            let _ = writeln!(s, "prices_path = {}", p.display());
        }
        if let Some(p) = &self.shares_path {
            let _ = writeln!(s, "shares_path = {}", p.display());
        }
        let _ = writeln!(s, "synthetic = {}", self.synthetic);
        let _ = writeln!(s, "synthetic_stocks = {}", self.synthetic_stocks);
        let _ = writeln!(s, "synthetic_days = {}", self.synthetic_days);
        let _ = writeln!(s, "train_fraction = {}", self.train_fraction);
        let _ = writeln!(
            s,
            "k_values = {}",
            self.k_values
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(
            s,
            "frequencies = {}",
            self.frequencies
                .iter()
                .map(|f| f.name())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(
            s,
            "benchmarks = {}",
            self.benchmarks
                .iter()
                .map(|b| b.name())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(
            s,
            "methods = {}",
            self.methods
                .iter()
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(s, "turnover_bound = {}", self.turnover_bound);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "recluster = {}", self.recluster);
        s
    }
}
