//! Pairwise similarity (sample correlation) and covariance estimation.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::panel::ReturnsPanel;

/// Scale of the diagonal ridge added to every covariance estimate,
/// applied as `RIDGE_SCALE * trace / n`.
pub const RIDGE_SCALE: f64 = 1e-8;

/// Sample Pearson correlation matrix of daily returns.
///
/// Symmetric with an exact unit diagonal and entries clamped to [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rho: Matrix,
}

impl SimilarityMatrix {
    /// Wraps a raw matrix, forcing the diagonal to exactly one so that a
    /// selected stock is always its own best representative.
    pub fn from_matrix(mut rho: Matrix) -> Result<Self> {
        if rho.rows() != rho.cols() {
            return Err(Error::Dimension {
                expected: rho.rows(),
                actual: rho.cols(),
            });
        }
        for i in 0..rho.rows() {
            rho[(i, i)] = 1.0;
        }
        Ok(Self { rho })
    }

    pub fn n(&self) -> usize {
        self.rho.rows()
    }

    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.rho[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rho
    }
}

/// Sample covariance matrix with a small diagonal ridge.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    v: Matrix,
    ridge: f64,
}

impl CovarianceMatrix {
    pub fn n(&self) -> usize {
        self.v.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.v
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Quadratic form `d' V d`.
    pub fn quad_form(&self, d: &[f64]) -> f64 {
        let vd = self.v.mul_vec(d);
        d.iter().zip(&vd).map(|(a, b)| a * b).sum()
    }
}

fn column_means(m: &Matrix) -> Vec<f64> {
    let t = m.rows() as f64;
    (0..m.cols()).map(|c| m.column(c).sum::<f64>() / t).collect()
}

/// Raw sample covariance (n-1 divisor) over all rows of `m`, no ridge.
fn sample_cov(m: &Matrix) -> Matrix {
    let (t, n) = (m.rows(), m.cols());
    let means = column_means(m);
    let mut cov = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for r in 0..t {
                acc += (m[(r, i)] - means[i]) * (m[(r, j)] - means[j]);
            }
            let v = acc / (t - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

/// Sample Pearson correlation of the full panel.
///
/// Fails with the offending ticker when a stock has zero return variance,
/// since its correlation with anything is undefined.
pub fn correlation(returns: &ReturnsPanel) -> Result<SimilarityMatrix> {
    if returns.rows() < 2 {
        return Err(Error::InsufficientData {
            context: "correlation estimation",
            required: 2,
            actual: returns.rows(),
        });
    }
    let cov = sample_cov(returns.returns());
    let n = cov.rows();
    for i in 0..n {
        if cov[(i, i)] <= 0.0 {
            return Err(Error::DegenerateInput(returns.tickers()[i].clone()));
        }
    }
    let mut rho = Matrix::zeros(n, n);
    for i in 0..n {
        rho[(i, i)] = 1.0;
        for j in i + 1..n {
            let r = cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt();
            let r = r.clamp(-1.0, 1.0);
            rho[(i, j)] = r;
            rho[(j, i)] = r;
        }
    }
    SimilarityMatrix::from_matrix(rho)
}

/// Sample covariance over the trailing `window` rows, ridged on the
/// diagonal by [`RIDGE_SCALE`] times the mean diagonal entry.
pub fn covariance(returns: &ReturnsPanel, window: usize) -> Result<CovarianceMatrix> {
    if window < 2 {
        return Err(Error::Invalid(alloc::format!(
            "covariance window {window} below minimum 2"
        )));
    }
    if window > returns.rows() {
        return Err(Error::InsufficientData {
            context: "covariance window",
            required: window,
            actual: returns.rows(),
        });
    }
    let tail = returns.slice(returns.rows() - window, returns.rows());
    let mut v = sample_cov(tail.returns());
    let n = v.rows();
    let trace: f64 = (0..n).map(|i| v[(i, i)]).sum();
    let ridge = RIDGE_SCALE * trace / n as f64;
    for i in 0..n {
        v[(i, i)] += ridge;
    }
    Ok(CovarianceMatrix { v, ridge })
}

/// Correlation implied by a covariance matrix via diagonal normalization,
/// after undoing the diagonal ridge.
pub fn correlation_from_covariance(cov: &CovarianceMatrix) -> Result<SimilarityMatrix> {
    let n = cov.n();
    let mut rho = Matrix::zeros(n, n);
    for i in 0..n {
        let dii = cov.matrix()[(i, i)] - cov.ridge();
        if dii <= 0.0 {
            return Err(Error::Invalid(alloc::format!(
                "non-positive covariance diagonal at {i}"
            )));
        }
        rho[(i, i)] = 1.0;
        for j in i + 1..n {
            let djj = cov.matrix()[(j, j)] - cov.ridge();
            let r = cov.matrix()[(i, j)] / (dii * djj).sqrt();
            rho[(i, j)] = r.clamp(-1.0, 1.0);
            rho[(j, i)] = rho[(i, j)];
        }
    }
    SimilarityMatrix::from_matrix(rho)
}
