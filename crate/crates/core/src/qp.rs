//! Benchmark-tracking quadratic program over the selected support.
//!
//! Minimizes `(x - x_b)' V (x - x_b)` subject to full investment
//! (`1'x = 1`), long-only (`x >= 0`), zero weight outside the selected
//! support, and, from the second rebalance on, an L1 turnover budget
//! `sum_i |x_i - x_prev_i| <= t` around the current holdings.
//!
//! The solver is an accelerated projected-gradient method (FISTA with
//! monotone restarts). The feasible set on the support coordinates is the
//! probability simplex intersected with an L1 ball around the previous
//! holdings; Euclidean projection onto the intersection runs Dykstra's
//! alternating scheme over the two elementary projections, both of which
//! have exact sort-based solutions. The covariance ridge makes the
//! objective strictly convex, so the iterates are deterministic and the
//! optimum unique.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::benchmarks::WeightVector;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::similarity::CovarianceMatrix;

/// Default convergence tolerance on objective suboptimality.
pub const DEFAULT_QP_TOL: f64 = 1e-8;

/// Default iteration budget.
pub const DEFAULT_QP_MAX_ITERS: usize = 10_000;

/// Slack allowed on the turnover constraint in the returned solution.
pub const TURNOVER_SLACK: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct QpProblem {
    covariance: CovarianceMatrix,
    benchmark: WeightVector,
    support: Vec<usize>,
    previous: Option<WeightVector>,
    turnover_bound: Option<f64>,
}

impl QpProblem {
    pub fn new(
        covariance: CovarianceMatrix,
        benchmark: WeightVector,
        support: Vec<usize>,
        previous: Option<WeightVector>,
        turnover_bound: Option<f64>,
    ) -> Result<Self> {
        let n = covariance.n();
        if benchmark.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: benchmark.len(),
            });
        }
        if let Some(prev) = &previous {
            if prev.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: prev.len(),
                });
            }
        }
        let mut support = support;
        support.sort_unstable();
        support.dedup();
        if support.is_empty() {
            return Err(Error::Invalid("empty support".into()));
        }
        if support.last().copied().unwrap_or(0) >= n {
            return Err(Error::Invalid(alloc::format!(
                "support index {} outside universe of {n}",
                support.last().unwrap()
            )));
        }
        if let Some(t) = turnover_bound {
            if t < 0.0 {
                return Err(Error::Invalid(alloc::format!(
                    "negative turnover bound {t}"
                )));
            }
        }
        Ok(Self {
            covariance,
            benchmark,
            support,
            previous,
            turnover_bound,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub weights: WeightVector,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// L1 distance between two weight vectors of equal length.
pub fn turnover(x_new: &WeightVector, x_old: &WeightVector) -> Result<f64> {
    if x_new.len() != x_old.len() {
        return Err(Error::Dimension {
            expected: x_old.len(),
            actual: x_new.len(),
        });
    }
    Ok(x_new
        .weights()
        .iter()
        .zip(x_old.weights())
        .map(|(a, b)| (a - b).abs())
        .sum())
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut tau = sorted[0] - 1.0;
    for (m, &u) in sorted.iter().enumerate() {
        acc += u;
        let t = (acc - 1.0) / (m + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Euclidean projection onto `{z : ||z - center||_1 <= radius}`.
fn project_l1_ball(v: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    let d: Vec<f64> = v.iter().zip(center).map(|(a, b)| a - b).collect();
    let norm: f64 = d.iter().map(|x| x.abs()).sum();
    if norm <= radius {
        return v.to_vec();
    }
    if radius <= 0.0 {
        return center.to_vec();
    }
    let mut mags: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut tau = 0.0;
    for (m, &u) in mags.iter().enumerate() {
        acc += u;
        let t = (acc - radius) / (m + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    d.iter()
        .zip(center)
        .map(|(x, c)| c + x.signum() * (x.abs() - tau).max(0.0))
        .collect()
}

/// Projection onto simplex intersected with an optional L1 ball, by
/// Dykstra's alternating projections. Sweeps end on the simplex step so
/// the result is exactly non-negative with unit sum.
fn project_feasible(v: &[f64], ball: Option<(&[f64], f64)>) -> Vec<f64> {
    let Some((center, radius)) = ball else {
        return project_simplex(v);
    };
    // When the simplex projection already sits inside the ball it minimizes
    // the distance over a superset of the intersection, so it is the
    // intersection projection and Dykstra is unnecessary.
    let candidate = project_simplex(v);
    if l1_distance(&candidate, center) <= radius {
        return candidate;
    }
    let n = v.len();
    let mut x = v.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for _ in 0..2000 {
        let xq: Vec<f64> = x.iter().zip(&q).map(|(a, b)| a + b).collect();
        let y = project_l1_ball(&xq, center, radius);
        for i in 0..n {
            q[i] = xq[i] - y[i];
        }
        let yp: Vec<f64> = y.iter().zip(&p).map(|(a, b)| a + b).collect();
        let x_new = project_simplex(&yp);
        for i in 0..n {
            p[i] = yp[i] - x_new[i];
        }
        let sweep_move = x_new
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let violation = (l1_distance(&x_new, center) - radius).max(0.0);
        x = x_new;
        if sweep_move <= 1e-15 && violation <= 1e-13 {
            break;
        }
    }
    x
}

/// Largest eigenvalue of the support-restricted covariance block, by
/// power iteration from a deterministic start.
fn lambda_max(v: &Matrix, support: &[usize]) -> f64 {
    let s = support.len();
    let mut block = Matrix::zeros(s, s);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            block[(a, b)] = v[(i, j)];
        }
    }
    let mut vec_: Vec<f64> = (0..s).map(|i| 1.0 + i as f64 * 1e-3).collect();
    let norm0 = vec_.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut vec_ {
        *x /= norm0;
    }
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = block.mul_vec(&vec_);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            return 0.0;
        }
        lambda = norm;
        for (t, s_) in vec_.iter_mut().zip(&w) {
            *t = s_ / norm;
        }
    }
    lambda
}

struct Reduced<'a> {
    v: &'a Matrix,
    benchmark: &'a [f64],
    support: &'a [usize],
    n: usize,
}

impl Reduced<'_> {
    fn embed(&self, z: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (a, &i) in self.support.iter().enumerate() {
            x[i] = z[a];
        }
        x
    }

    fn objective(&self, z: &[f64]) -> f64 {
        let x = self.embed(z);
        let d: Vec<f64> = x.iter().zip(self.benchmark).map(|(a, b)| a - b).collect();
        let vd = self.v.mul_vec(&d);
        d.iter().zip(&vd).map(|(a, b)| a * b).sum()
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let x = self.embed(z);
        let d: Vec<f64> = x.iter().zip(self.benchmark).map(|(a, b)| a - b).collect();
        let vd = self.v.mul_vec(&d);
        self.support.iter().map(|&i| 2.0 * vd[i]).collect()
    }
}

/// Solves the tracking program to within `tol` of the constrained optimum.
///
/// Deterministic given identical inputs. Fails with the minimum feasible
/// turnover when the budget cannot move the previous holdings onto the
/// support.
pub fn solve_tracking_qp(
    problem: &QpProblem,
    tol: f64,
    max_iters: usize,
) -> Result<QpSolution> {
    let support = &problem.support;
    let n = problem.covariance.n();
    let x_b = problem.benchmark.weights();

    // Turnover feasibility: reaching the support costs twice the previous
    // off-support mass (it must leave those names and land somewhere).
    let ball_spec: Option<(Vec<f64>, f64)> = match (&problem.previous, problem.turnover_bound) {
        (Some(prev), Some(t)) => {
            let off = prev.off_support_mass(support);
            let min_turnover = 2.0 * off;
            if t < min_turnover - 1e-12 || (t == 0.0 && off > 0.0) {
                return Err(Error::Infeasible {
                    bound: t,
                    min_turnover,
                });
            }
            if t == 0.0 {
                // Singleton feasible set: hold the previous portfolio.
                let objective = problem.covariance.quad_form(
                    &prev
                        .weights()
                        .iter()
                        .zip(x_b)
                        .map(|(a, b)| a - b)
                        .collect::<Vec<f64>>(),
                );
                return Ok(QpSolution {
                    weights: stamp_like(prev.clone(), &problem.benchmark),
                    objective: objective.max(0.0),
                    iterations: 0,
                    converged: true,
                });
            }
            let center: Vec<f64> = support.iter().map(|&i| prev.weights()[i]).collect();
            Some((center, t - off))
        }
        _ => None,
    };

    // The benchmark itself is the unconstrained minimizer; when it is
    // feasible the program is solved exactly.
    let bench_on_support = problem.benchmark.off_support_mass(support) == 0.0;
    let bench_within_budget = match (&problem.previous, problem.turnover_bound) {
        (Some(prev), Some(t)) => l1_distance(x_b, prev.weights()) <= t,
        _ => true,
    };
    if bench_on_support && bench_within_budget {
        return Ok(QpSolution {
            weights: problem.benchmark.clone(),
            objective: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let reduced = Reduced {
        v: problem.covariance.matrix(),
        benchmark: x_b,
        support,
        n,
    };
    let ball = ball_spec.as_ref().map(|(c, r)| (c.as_slice(), *r));

    let start: Vec<f64> = match &problem.previous {
        Some(prev) => support.iter().map(|&i| prev.weights()[i]).collect(),
        None => support.iter().map(|&i| x_b[i]).collect(),
    };
    let mut z = project_feasible(&start, ball);

    let lips = 2.0 * lambda_max(problem.covariance.matrix(), support);
    if lips <= 1e-300 {
        // Degenerate objective: every feasible point is optimal.
        let weights = WeightVector::new(reduced.embed(&z))?;
        return Ok(QpSolution {
            weights: stamp_like(weights, &problem.benchmark),
            objective: reduced.objective(&z).max(0.0),
            iterations: 0,
            converged: true,
        });
    }

    let mut step = 1.0 / lips;
    let mut y = z.clone();
    let mut f_z = reduced.objective(&z);
    let mut momentum = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut stagnant = 0usize;

    for it in 0..max_iters {
        iterations = it + 1;
        let g = reduced.gradient(&y);
        let cand: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let z_new = project_feasible(&cand, ball);
        let f_new = reduced.objective(&z_new);

        if f_new > f_z {
            if y != z {
                // Momentum overshot; restart from the last good iterate.
                y = z.clone();
                momentum = 1.0;
                continue;
            }
            // Plain step failed: the curvature estimate was too low.
            step *= 0.5;
            if step < 1e-300 {
                converged = true;
                break;
            }
            continue;
        }

        let moved = z_new
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let decrease = f_z - f_new;

        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        y = z_new
            .iter()
            .zip(&z)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        momentum = next_momentum;
        z = z_new;
        f_z = f_new;

        if moved <= 1e-14 && decrease <= 1e-18 * f_z.abs().max(1.0) {
            stagnant += 1;
        } else {
            stagnant = 0;
        }
        if stagnant >= 5 {
            converged = true;
            break;
        }

        // Suboptimality certificate via the gradient mapping: the feasible
        // set has L1 diameter at most 2, so f - f* <= 2 ||G||.
        if it % 10 == 9 {
            let gz = reduced.gradient(&z);
            let probe: Vec<f64> = z.iter().zip(&gz).map(|(a, b)| a - step * b).collect();
            let pz = project_feasible(&probe, ball);
            let g_map: f64 = z
                .iter()
                .zip(&pz)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                / step;
            if 2.0 * g_map <= tol {
                converged = true;
                break;
            }
        }
    }

    debug_assert!(
        ball_spec
            .as_ref()
            .map(|(c, r)| l1_distance(&z, c) <= r + TURNOVER_SLACK)
            .unwrap_or(true),
        "turnover constraint violated beyond slack"
    );

    let weights = WeightVector::new(reduced.embed(&z))?;
    Ok(QpSolution {
        weights: stamp_like(weights, &problem.benchmark),
        objective: reduced.objective(&z).max(0.0),
        iterations,
        converged,
    })
}

fn stamp_like(w: WeightVector, like: &WeightVector) -> WeightVector {
    match like.asof() {
        Some(d) => w.stamped(d),
        None => w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::ReturnsPanel;
    use crate::similarity::covariance;
    use alloc::format;
    use alloc::string::String;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random ridged PSD covariance via random return rows, scaled to
    /// daily-variance magnitudes so grid-search error stays tiny.
    fn random_cov(n: usize, rng: &mut ChaCha8Rng) -> CovarianceMatrix {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..n).map(|_| rng.gen_range(-0.02..0.02)).collect())
            .collect();
        let dates: Vec<String> = (0..40).map(|i| format!("d{i:03}")).collect();
        let tickers = (0..n).map(|i| format!("S{i}")).collect();
        let panel =
            ReturnsPanel::from_parts(dates, tickers, Matrix::from_rows(&rows).unwrap()).unwrap();
        covariance(&panel, 40).unwrap()
    }

    fn random_simplex(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| -f64::ln(rng.gen_range(1e-9..1.0))).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|x| x / s).collect()
    }

    /// Brute-force grid search over the support simplex at the given
    /// resolution, honoring the turnover ball when present.
    fn grid_oracle(
        cov: &CovarianceMatrix,
        x_b: &[f64],
        support: &[usize],
        prev: Option<(&[f64], f64)>,
        res: usize,
    ) -> f64 {
        let n = x_b.len();
        let s = support.len();
        assert!(s == 2 || s == 3, "oracle supports 2 or 3 support stocks");
        let mut best = f64::INFINITY;
        let mut eval = |parts: &[usize]| {
            let mut x = vec![0.0; n];
            for (a, &i) in support.iter().enumerate() {
                x[i] = parts[a] as f64 / res as f64;
            }
            if let Some((p, t)) = prev {
                let dist: f64 = x.iter().zip(p).map(|(u, v)| (u - v).abs()).sum();
                if dist > t + 1e-12 {
                    return;
                }
            }
            let d: Vec<f64> = x.iter().zip(x_b).map(|(u, v)| u - v).collect();
            let obj = cov.quad_form(&d);
            if obj < best {
                best = obj;
            }
        };
        if s == 2 {
            for i in 0..=res {
                eval(&[i, res - i]);
            }
        } else {
            for i in 0..=res {
                for j in 0..=(res - i) {
                    eval(&[i, j, res - i - j]);
                }
            }
        }
        best
    }

    fn wv(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn turnover_identities() {
        assert_eq!(turnover(&wv(&[1.0, 0.0]), &wv(&[1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(turnover(&wv(&[1.0, 0.0]), &wv(&[0.0, 1.0])).unwrap(), 2.0);
        let t = turnover(&wv(&[0.5, 0.5]), &wv(&[0.6, 0.4])).unwrap();
        assert!((t - 0.2).abs() < 1e-15);
        assert!(matches!(
            turnover(&wv(&[1.0]), &wv(&[0.5, 0.5])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn benchmark_on_support_is_returned_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let cov = random_cov(3, &mut rng);
        let x_b = wv(&[0.2, 0.5, 0.3]);
        let p = QpProblem::new(cov, x_b.clone(), vec![0, 1, 2], None, None).unwrap();
        let sol = solve_tracking_qp(&p, 1e-8, 1000).unwrap();
        assert_eq!(sol.weights.weights(), x_b.weights());
        assert_eq!(sol.objective, 0.0);
        assert!(sol.converged);
    }

    #[test]
    fn zero_turnover_freezes_previous_holdings() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let cov = random_cov(3, &mut rng);
        let prev = wv(&[0.1, 0.6, 0.3]);
        let p = QpProblem::new(
            cov,
            wv(&[0.4, 0.3, 0.3]),
            vec![0, 1, 2],
            Some(prev.clone()),
            Some(0.0),
        )
        .unwrap();
        let sol = solve_tracking_qp(&p, 1e-8, 1000).unwrap();
        assert_eq!(sol.weights.weights(), prev.weights());
        assert!(sol.converged);
    }

    #[test]
    fn infeasible_budget_reports_minimum_turnover() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let cov = random_cov(3, &mut rng);
        // Previous holdings have 0.5 outside the support {0}; moving onto
        // the support costs 1.0 in total.
        let prev = wv(&[0.5, 0.5, 0.0]);
        let p = QpProblem::new(
            cov,
            wv(&[1.0, 0.0, 0.0]),
            vec![0],
            Some(prev),
            Some(0.4),
        )
        .unwrap();
        match solve_tracking_qp(&p, 1e-8, 1000) {
            Err(Error::Infeasible {
                bound,
                min_turnover,
            }) => {
                assert_eq!(bound, 0.4);
                assert!((min_turnover - 1.0).abs() < 1e-12);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn matches_grid_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let bounds = [0.1, 0.5, 2.0];
        for trial in 0..6 {
            let cov = random_cov(3, &mut rng);
            let x_b = wv(&random_simplex(3, &mut rng));
            let prev = wv(&random_simplex(3, &mut rng));
            let t = bounds[trial % bounds.len()];
            let p = QpProblem::new(
                cov.clone(),
                x_b.clone(),
                vec![0, 1, 2],
                Some(prev.clone()),
                Some(t),
            )
            .unwrap();
            let sol = solve_tracking_qp(&p, 1e-8, DEFAULT_QP_MAX_ITERS).unwrap();
            let oracle = grid_oracle(
                &cov,
                x_b.weights(),
                &[0, 1, 2],
                Some((prev.weights(), t)),
                200,
            );
            assert!(
                (sol.objective - oracle).abs() < 1e-4,
                "trial {trial}: solver {} vs oracle {oracle}",
                sol.objective
            );
            // Solution invariants.
            let w = sol.weights.weights();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-8);
            assert!(w.iter().all(|&x| x >= 0.0));
            let realized = turnover(&sol.weights, &prev).unwrap();
            assert!(realized <= t + TURNOVER_SLACK, "turnover {realized} > {t}");
        }
    }

    #[test]
    fn support_restriction_zeroes_off_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let cov = random_cov(4, &mut rng);
        let x_b = wv(&random_simplex(4, &mut rng));
        let p = QpProblem::new(cov, x_b, vec![1, 3], None, None).unwrap();
        let sol = solve_tracking_qp(&p, 1e-8, DEFAULT_QP_MAX_ITERS).unwrap();
        assert_eq!(sol.weights.weights()[0], 0.0);
        assert_eq!(sol.weights.weights()[2], 0.0);
        assert!(sol.objective > 0.0);
    }

    #[test]
    fn widening_the_budget_never_hurts() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..5 {
            let cov = random_cov(3, &mut rng);
            let x_b = wv(&random_simplex(3, &mut rng));
            let prev = wv(&random_simplex(3, &mut rng));
            let mut last = f64::INFINITY;
            for t in [0.05, 0.2, 0.8, 2.0] {
                let p = QpProblem::new(
                    cov.clone(),
                    x_b.clone(),
                    vec![0, 1, 2],
                    Some(prev.clone()),
                    Some(t),
                )
                .unwrap();
                let sol = solve_tracking_qp(&p, 1e-10, DEFAULT_QP_MAX_ITERS).unwrap();
                assert!(
                    sol.objective <= last + 1e-9,
                    "objective rose from {last} to {} at t={t}",
                    sol.objective
                );
                last = sol.objective;
            }
        }
    }

    #[test]
    fn wider_support_never_hurts() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..5 {
            let cov = random_cov(3, &mut rng);
            let x_b = wv(&random_simplex(3, &mut rng));
            let narrow = QpProblem::new(cov.clone(), x_b.clone(), vec![0, 1], None, None).unwrap();
            let wide = QpProblem::new(cov, x_b, vec![0, 1, 2], None, None).unwrap();
            let o_narrow = solve_tracking_qp(&narrow, 1e-10, DEFAULT_QP_MAX_ITERS)
                .unwrap()
                .objective;
            let o_wide = solve_tracking_qp(&wide, 1e-10, DEFAULT_QP_MAX_ITERS)
                .unwrap()
                .objective;
            assert!(o_wide <= o_narrow + 1e-9);
        }
    }

    #[test]
    fn stationarity_at_the_returned_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..5 {
            let cov = random_cov(3, &mut rng);
            let x_b = wv(&random_simplex(3, &mut rng));
            let prev = wv(&random_simplex(3, &mut rng));
            let p = QpProblem::new(
                cov.clone(),
                x_b.clone(),
                vec![0, 1, 2],
                Some(prev.clone()),
                Some(0.5),
            )
            .unwrap();
            let sol = solve_tracking_qp(&p, 1e-10, DEFAULT_QP_MAX_ITERS).unwrap();

            // Projected-gradient norm at the solution.
            let z: Vec<f64> = sol.weights.weights().to_vec();
            let d: Vec<f64> = z.iter().zip(x_b.weights()).map(|(a, b)| a - b).collect();
            let vd = cov.matrix().mul_vec(&d);
            let grad: Vec<f64> = vd.iter().map(|g| 2.0 * g).collect();
            let lips = 2.0 * lambda_max(cov.matrix(), &[0, 1, 2]);
            let step = 1.0 / lips;
            let cand: Vec<f64> = z.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
            let off = prev.off_support_mass(&[0, 1, 2]);
            let center: Vec<f64> = prev.weights().to_vec();
            let pz = project_feasible(&cand, Some((&center, 0.5 - off)));
            let g_map = z
                .iter()
                .zip(&pz)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                / step;
            assert!(g_map <= 1e-6, "projected gradient norm {g_map}");
        }
    }

    #[test]
    fn objective_strictly_positive_away_from_benchmark() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let cov = random_cov(3, &mut rng);
        assert!(cov.ridge() > 0.0);
        let x_b = wv(&[0.0, 0.5, 0.5]);
        // Force x away from x_b by restricting the support.
        let p = QpProblem::new(cov, x_b, vec![0, 1], None, None).unwrap();
        let sol = solve_tracking_qp(&p, 1e-10, DEFAULT_QP_MAX_ITERS).unwrap();
        assert!(sol.objective > 0.0);
    }

    #[test]
    fn projections_are_exact_on_small_cases() {
        let p = project_simplex(&[0.4, 0.9]);
        assert!((p[0] - 0.25).abs() < 1e-15);
        assert!((p[1] - 0.75).abs() < 1e-15);
        let q = project_simplex(&[-1.0, 0.0, 3.0]);
        assert_eq!(q, vec![0.0, 0.0, 1.0]);

        let b = project_l1_ball(&[0.5, 0.5], &[0.0, 0.0], 0.5);
        assert!((b[0] - 0.25).abs() < 1e-15 && (b[1] - 0.25).abs() < 1e-15);
        let inside = project_l1_ball(&[0.1, 0.1], &[0.0, 0.0], 1.0);
        assert_eq!(inside, vec![0.1, 0.1]);
    }
}
