//! Cluster-capitalization weighting of the selected stocks.
//!
//! Each representative carries the total market capitalization of the
//! cluster it stands for, divided by the capitalization of the whole
//! universe. Because the clusters partition the universe, the weights sum
//! to one by construction; the constructor asserts rather than
//! renormalizes.

use alloc::vec;

use crate::benchmarks::WeightVector;
use crate::clustering::ClusterSolution;
use crate::error::Result;
use crate::panel::MarketCapPanel;

/// Weights the representatives by the market capitalization of their
/// clusters, read at the most recent cap observation at or before `asof`.
pub fn cluster_cap_weights(
    solution: &ClusterSolution,
    caps: &MarketCapPanel,
    asof: &str,
) -> Result<WeightVector> {
    let row = caps.resolve_asof(asof)?;
    let cap_row = caps.caps().row(row);
    let total: f64 = cap_row.iter().sum();

    let mut weights = vec![0.0; caps.n_stocks()];
    for (i, &rep) in solution.assignment().iter().enumerate() {
        weights[rep] += cap_row[i] / total;
    }
    Ok(WeightVector::new(weights)?.stamped(asof))
}
