//! Experiment front end for `sparsetrack-core`: CSV ingestion, flat-file
//! configuration, and the grid runner behind the `sparsetrack` binary.

pub mod config;
pub mod csvio;
pub mod runner;
