//! Sparse index-tracking portfolio construction.
//!
//! Builds a portfolio of `k` representative stocks out of a universe of `n`
//! that tracks a benchmark as closely as possible. Selection solves a binary
//! linear clustering program over the return correlation matrix (exactly at
//! desk scale, by Lagrangian relaxation above it); the representatives are
//! then weighted either by the market capitalization of the cluster each one
//! stands for or by a turnover-constrained quadratic tracking optimizer. A
//! backtest engine rebalances against equal-weight, market-cap, and
//! inverse-volatility benchmarks and reports tracking error and turnover.
//!
//! The crate is `no_std`-compatible (requires `alloc`). CSV ingestion, file
//! output, and the experiment CLI live in the companion `sparsetrack-cli`
//! crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod backtest;
pub mod benchmarks;
pub mod clustering;
pub mod error;
pub mod heuristic;
pub mod matrix;
pub mod panel;
pub mod qp;
pub mod similarity;
pub mod synthetic;

pub use error::{Error, Result};
