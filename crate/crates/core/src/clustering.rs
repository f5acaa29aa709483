//! Representative-stock selection as a binary linear clustering program.
//!
//! Out of `n` stocks, pick `k` representatives and assign every stock to its
//! most similar pick, maximizing total assigned similarity:
//!
//! ```text
//! max  sum_ij rho_ij x_ij
//! s.t. sum_j y_j = k,   sum_j x_ij = 1,   x_ij <= y_j,   x, y binary.
//! ```
//!
//! Two solvers are provided. [`solve_exact`] finds the global optimum at desk
//! scale by exhaustive subset enumeration for small `n` and depth-first
//! branch-and-bound above that. [`solve_lagrangian`] relaxes the
//! one-assignment-per-stock constraints into the objective with multipliers
//! `u`, tightens the resulting upper bound `L(u)` by subgradient steps, and
//! rounds each inner solution to a feasible portfolio, keeping the best.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

/// Largest universe accepted by [`solve_exact`].
pub const DEFAULT_EXACT_CAP: usize = 25;

/// Below this size plain enumeration beats branch-and-bound bookkeeping.
const ENUMERATION_LIMIT: usize = 15;

/// Subgradient iterations with no bound improvement before the Polyak
/// scale is halved.
const STALL_LIMIT: usize = 20;

/// Default iteration budget and relative-gap tolerance for the
/// Lagrangian solver.
pub const DEFAULT_MAX_ITERS: usize = 1000;
pub const DEFAULT_GAP_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct ClusterProblem {
    rho: SimilarityMatrix,
    k: usize,
}

impl ClusterProblem {
    pub fn new(rho: SimilarityMatrix, k: usize) -> Result<Self> {
        let n = rho.n();
        if k < 1 || k > n {
            return Err(Error::Invalid(alloc::format!(
                "cluster count k={k} outside 1..={n}"
            )));
        }
        Ok(Self { rho, k })
    }

    pub fn n(&self) -> usize {
        self.rho.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rho(&self) -> &SimilarityMatrix {
        &self.rho
    }
}

/// A feasible selection: `k` representatives, every stock assigned to one
/// of them, and the achieved objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSolution {
    selected: Vec<usize>,
    assignment: Vec<usize>,
    objective: f64,
}

impl ClusterSolution {
    /// Builds the best feasible solution with representative set
    /// `selected`: each stock goes to its most similar representative,
    /// ties preferring self-assignment and then the lowest index.
    pub fn from_selected(rho: &SimilarityMatrix, selected: &[usize]) -> Self {
        let mut sel = selected.to_vec();
        sel.sort_unstable();
        sel.dedup();
        let n = rho.n();
        let mut assignment = Vec::with_capacity(n);
        let mut objective = 0.0;
        for i in 0..n {
            let mut best_j = sel[0];
            let mut best = rho.rho(i, best_j);
            for &j in &sel[1..] {
                let v = rho.rho(i, j);
                if v > best || (v == best && j == i) {
                    best = v;
                    best_j = j;
                }
            }
            assignment.push(best_j);
            objective += best;
        }
        Self {
            selected: sel,
            assignment,
            objective,
        }
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn k(&self) -> usize {
        self.selected.len()
    }

    /// Members of the cluster represented by `rep` (always contains `rep`).
    pub fn cluster_members(&self, rep: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |&(_, &a)| a == rep)
            .map(|(i, _)| i)
    }
}

/// Globally optimal representative selection.
///
/// Ties between equally good subsets resolve to the lexicographically
/// smallest selected index set.
pub fn solve_exact(problem: &ClusterProblem) -> Result<ClusterSolution> {
    let n = problem.n();
    if n > DEFAULT_EXACT_CAP {
        return Err(Error::ExactCapExceeded {
            n,
            cap: DEFAULT_EXACT_CAP,
        });
    }
    if n <= ENUMERATION_LIMIT {
        Ok(solve_by_enumeration(problem))
    } else {
        Ok(solve_by_branch_and_bound(problem))
    }
}

fn solve_by_enumeration(problem: &ClusterProblem) -> ClusterSolution {
    let (n, k, rho) = (problem.n(), problem.k(), problem.rho());
    let mut subset: Vec<usize> = (0..k).collect();
    let mut best: Option<ClusterSolution> = None;
    loop {
        let cand = ClusterSolution::from_selected(rho, &subset);
        // Lexicographic iteration order plus strict improvement keeps the
        // lexicographically smallest subset among ties.
        if best.as_ref().is_none_or(|b| cand.objective > b.objective) {
            best = Some(cand);
        }
        // Advance to the next k-combination of 0..n in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return best.unwrap();
            }
            i -= 1;
            if subset[i] != i + n - k {
                break;
            }
        }
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Depth-first branch-and-bound over the selection vector `y` in index
/// order, include-branch first, so equally good subsets are still found in
/// lexicographic order.
///
/// Node bound: the smaller of the relaxed bound at `u = 0` (all of the
/// chosen columns' positive mass plus the best remaining column gains) and
/// the per-row best-available-similarity bound. Both dominate every
/// completion of the node.
fn solve_by_branch_and_bound(problem: &ClusterProblem) -> ClusterSolution {
    let (n, k, rho) = (problem.n(), problem.k(), problem.rho());

    // Column gains at u = 0.
    let gplus: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| rho.rho(i, j).max(0.0)).sum())
        .collect();

    // suffix_max[p][i]: best similarity of row i over columns >= p.
    let mut suffix_max = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    for p in (0..n).rev() {
        for i in 0..n {
            suffix_max[p][i] = suffix_max[p + 1][i].max(rho.rho(i, p));
        }
    }

    // top_gain_sums[p][m]: sum of the m largest gains among columns >= p.
    let mut top_gain_sums = vec![vec![0.0; n + 1]; n + 1];
    for p in 0..n {
        let mut tail: Vec<f64> = gplus[p..].to_vec();
        tail.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        let mut acc = 0.0;
        for (m, g) in tail.iter().enumerate() {
            acc += g;
            top_gain_sums[p][m + 1] = acc;
        }
    }

    // Greedy incumbent value used only as a pruning threshold; keeping it
    // out of the incumbent slot preserves the lexicographic tie rule.
    let greedy_value = ClusterSolution::from_selected(rho, &greedy_selection(rho, k)).objective();

    struct Search<'a> {
        rho: &'a SimilarityMatrix,
        n: usize,
        k: usize,
        gplus: &'a [f64],
        suffix_max: &'a [Vec<f64>],
        top_gain_sums: &'a [Vec<f64>],
        chosen: Vec<usize>,
        row_best: Vec<f64>,
        gain_sum: f64,
        threshold: f64,
        best: Option<(f64, Vec<usize>)>,
    }

    impl Search<'_> {
        fn run(&mut self, p: usize) {
            let c = self.chosen.len();
            if c == self.k {
                let obj: f64 = self.row_best.iter().sum();
                if self.best.as_ref().is_none_or(|(b, _)| obj > *b) {
                    self.best = Some((obj, self.chosen.clone()));
                    self.threshold = self.threshold.max(obj);
                }
                return;
            }
            let slots = self.k - c;
            if self.n - p < slots {
                return;
            }
            let row_bound: f64 = (0..self.n)
                .map(|i| self.row_best[i].max(self.suffix_max[p][i]))
                .sum();
            let relaxed_bound = self.gain_sum + self.top_gain_sums[p][slots];
            if row_bound.min(relaxed_bound) <= self.threshold {
                return;
            }

            // Include column p.
            let saved: Vec<f64> = self.row_best.clone();
            for i in 0..self.n {
                self.row_best[i] = self.row_best[i].max(self.rho.rho(i, p));
            }
            self.chosen.push(p);
            self.gain_sum += self.gplus[p];
            self.run(p + 1);
            self.gain_sum -= self.gplus[p];
            self.chosen.pop();
            self.row_best = saved;

            // Exclude column p.
            self.run(p + 1);
        }
    }

    let mut search = Search {
        rho,
        n,
        k,
        gplus: &gplus,
        suffix_max: &suffix_max,
        top_gain_sums: &top_gain_sums,
        chosen: Vec::with_capacity(k),
        row_best: vec![f64::NEG_INFINITY; n],
        gain_sum: 0.0,
        threshold: greedy_value - 1e-9,
        best: None,
    };
    search.run(0);
    let (_, selected) = search.best.expect("k <= n guarantees a feasible subset");
    ClusterSolution::from_selected(rho, &selected)
}

/// Greedily adds the representative with the largest marginal objective
/// gain; the result seeds branch-and-bound pruning.
fn greedy_selection(rho: &SimilarityMatrix, k: usize) -> Vec<usize> {
    let n = rho.n();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut row_best: Vec<Option<f64>> = vec![None; n];
    for _ in 0..k {
        let mut best_gain = f64::NEG_INFINITY;
        let mut best_j = usize::MAX;
        for j in 0..n {
            if chosen.contains(&j) {
                continue;
            }
            let gain: f64 = (0..n)
                .map(|i| match row_best[i] {
                    Some(b) => (rho.rho(i, j) - b).max(0.0),
                    None => rho.rho(i, j),
                })
                .sum();
            if gain > best_gain {
                best_gain = gain;
                best_j = j;
            }
        }
        chosen.push(best_j);
        for i in 0..n {
            let v = rho.rho(i, best_j);
            row_best[i] = Some(row_best[i].map_or(v, |b| b.max(v)));
        }
    }
    chosen
}

/// Inner maximization of the Lagrangian at fixed multipliers `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    /// `L(u)` for the given multipliers.
    pub value: f64,
    /// The `y_j = 1` set: the `k` columns with the largest gains, ties to
    /// the lower index.
    pub selected: Vec<usize>,
    /// Per stock, how many selected columns pay a strictly positive
    /// reduced similarity `rho_ij - u_i`; the subgradient is one minus
    /// this count.
    pub assignment_counts: Vec<usize>,
}

/// Solves the inner problem in closed form: gain `g_j = sum_i
/// max(0, rho_ij - u_i)`, keep the `k` best columns, and set `x_ij = 1`
/// exactly where the reduced similarity is positive within those columns.
pub fn evaluate_inner(problem: &ClusterProblem, u: &[f64]) -> InnerSolution {
    let (n, k, rho) = (problem.n(), problem.k(), problem.rho());
    assert_eq!(u.len(), n, "multiplier vector length");

    let gains: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| (rho.rho(i, j) - u[i]).max(0.0)).sum())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        gains[b]
            .partial_cmp(&gains[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut selected: Vec<usize> = order[..k].to_vec();
    selected.sort_unstable();

    let mut counts = vec![0usize; n];
    for i in 0..n {
        counts[i] = selected
            .iter()
            .filter(|&&j| rho.rho(i, j) - u[i] > 0.0)
            .count();
    }
    let value = selected.iter().map(|&j| gains[j]).sum::<f64>() + u.iter().sum::<f64>();
    InnerSolution {
        value,
        selected,
        assignment_counts: counts,
    }
}

/// Multiplier state carried across subgradient iterations.
#[derive(Debug, Clone)]
pub struct LagrangianState {
    pub multipliers: Vec<f64>,
    /// Best (lowest) upper bound `L(u)` observed so far.
    pub bound: f64,
    /// Polyak step scale, halved after [`STALL_LIMIT`] stalls.
    pub theta: f64,
    pub stalls: usize,
    pub iterations: usize,
    pub converged: bool,
    pub best_feasible: Option<ClusterSolution>,
}

impl LagrangianState {
    pub fn new(n: usize) -> Self {
        Self {
            multipliers: vec![0.0; n],
            bound: f64::INFINITY,
            theta: 2.0,
            stalls: 0,
            iterations: 0,
            converged: false,
            best_feasible: None,
        }
    }

    /// Folds a fresh inner value into the bound; the bound never increases.
    pub fn observe_bound(&mut self, inner_value: f64) {
        if inner_value < self.bound - 1e-12 * self.bound.abs().max(1.0) {
            self.bound = inner_value;
            self.stalls = 0;
        } else {
            self.bound = self.bound.min(inner_value);
            self.stalls += 1;
            if self.stalls >= STALL_LIMIT {
                self.theta *= 0.5;
                self.stalls = 0;
            }
        }
    }

    /// Polyak subgradient step on the multipliers.
    ///
    /// The subgradient of `L` at `u` is `1 - count_i` per coordinate;
    /// descending the bound moves against it, so an over-assigned stock has
    /// its multiplier raised (its assignments become less profitable) and an
    /// unassigned stock has it lowered. A zero subgradient means the inner
    /// solution is feasible and optimal for the current multipliers.
    pub fn subgradient_step(&mut self, inner: &InnerSolution) {
        let g: Vec<f64> = inner
            .assignment_counts
            .iter()
            .map(|&c| 1.0 - c as f64)
            .collect();
        let norm_sq: f64 = g.iter().map(|x| x * x).sum();
        if norm_sq == 0.0 {
            self.converged = true;
            return;
        }
        let target = self
            .best_feasible
            .as_ref()
            .map_or(0.0, ClusterSolution::objective);
        let gap = self.bound - target;
        if gap <= 0.0 {
            self.converged = true;
            return;
        }
        let step = self.theta * gap / norm_sq;
        for (ui, gi) in self.multipliers.iter_mut().zip(&g) {
            *ui -= step * gi;
        }
    }
}

/// Lagrangian relaxation with subgradient ascent on the dual.
///
/// Every iteration rounds the inner selection to a feasible solution and
/// keeps the best one seen; terminates when the relative gap between the
/// bound and the best feasible objective falls under `tol`, when the
/// subgradient vanishes, or after `max_iters`.
pub fn solve_lagrangian(
    problem: &ClusterProblem,
    max_iters: usize,
    tol: f64,
) -> (ClusterSolution, LagrangianState) {
    let mut state = LagrangianState::new(problem.n());
    for iter in 0..max_iters {
        let inner = evaluate_inner(problem, &state.multipliers);
        state.observe_bound(inner.value);

        let rounded = ClusterSolution::from_selected(problem.rho(), &inner.selected);
        if state
            .best_feasible
            .as_ref()
            .is_none_or(|b| rounded.objective() > b.objective())
        {
            state.best_feasible = Some(rounded);
        }
        state.iterations = iter + 1;

        let best_obj = state.best_feasible.as_ref().unwrap().objective();
        if (state.bound - best_obj) / state.bound.abs().max(1.0) <= tol {
            state.converged = true;
            break;
        }
        state.subgradient_step(&inner);
        if state.converged {
            break;
        }
    }
    let best = state.best_feasible.clone().expect("max_iters >= 1");
    (best, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sim_from_rows(rows: &[Vec<f64>]) -> SimilarityMatrix {
        SimilarityMatrix::from_matrix(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    /// Random symmetric similarity with unit diagonal.
    fn random_sim(n: usize, rng: &mut ChaCha8Rng) -> SimilarityMatrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
            for j in i + 1..n {
                let v: f64 = rng.gen_range(-0.5..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SimilarityMatrix::from_matrix(m).unwrap()
    }

    /// Brute-force oracle: enumerate every k-subset and take the best
    /// total row-max similarity, lexicographically smallest among ties.
    fn oracle_best(rho: &SimilarityMatrix, k: usize) -> (f64, Vec<usize>) {
        fn rec(
            rho: &SimilarityMatrix,
            k: usize,
            start: usize,
            cur: &mut Vec<usize>,
            best: &mut Option<(f64, Vec<usize>)>,
        ) {
            if cur.len() == k {
                let obj: f64 = (0..rho.n())
                    .map(|i| {
                        cur.iter()
                            .map(|&j| rho.rho(i, j))
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .sum();
                if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                    *best = Some((obj, cur.clone()));
                }
                return;
            }
            for j in start..rho.n() {
                cur.push(j);
                rec(rho, k, j + 1, cur, best);
                cur.pop();
            }
        }
        let mut best = None;
        rec(rho, k, 0, &mut Vec::new(), &mut best);
        best.unwrap()
    }

    #[test]
    fn k_equals_n_selects_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_sim(6, &mut rng);
        let sol = solve_exact(&ClusterProblem::new(rho, 6).unwrap()).unwrap();
        assert_eq!(sol.selected(), &[0, 1, 2, 3, 4, 5]);
        for (i, &a) in sol.assignment().iter().enumerate() {
            assert_eq!(a, i);
        }
        assert!((sol.objective() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn k_one_picks_best_column_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_sim(7, &mut rng);
        let sol = solve_exact(&ClusterProblem::new(rho.clone(), 1).unwrap()).unwrap();
        let sums: Vec<f64> = (0..7).map(|j| (0..7).map(|i| rho.rho(i, j)).sum()).collect();
        let best = sums
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!(sol.selected(), &[best.0]);
        assert!((sol.objective() - best.1).abs() < 1e-12);
    }

    #[test]
    fn exact_matches_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..20 {
            let n = 8 + (trial % 3);
            let k = 2 + (trial % 3);
            let rho = random_sim(n, &mut rng);
            let sol = solve_exact(&ClusterProblem::new(rho.clone(), k).unwrap()).unwrap();
            let (obj, sel) = oracle_best(&rho, k);
            assert_eq!(sol.objective(), obj, "trial {trial}");
            assert_eq!(sol.selected(), sel.as_slice(), "trial {trial}");
        }
    }

    #[test]
    fn branch_and_bound_agrees_with_enumeration_above_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &k in &[2, 5, 9] {
            let rho = random_sim(18, &mut rng);
            let sol = solve_exact(&ClusterProblem::new(rho.clone(), k).unwrap()).unwrap();
            let (obj, sel) = oracle_best(&rho, k);
            assert!((sol.objective() - obj).abs() < 1e-9);
            assert_eq!(sol.selected(), sel.as_slice());
        }
    }

    #[test]
    fn cap_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_sim(26, &mut rng);
        assert_eq!(
            solve_exact(&ClusterProblem::new(rho, 3).unwrap()),
            Err(Error::ExactCapExceeded { n: 26, cap: 25 })
        );
    }

    #[test]
    fn degenerate_identity_matrix_breaks_ties_low() {
        let rho = sim_from_rows(&[
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ]);
        let sol = solve_exact(&ClusterProblem::new(rho.clone(), 2).unwrap()).unwrap();
        assert_eq!(sol.selected(), &[0, 1]);
        assert!((sol.objective() - 2.0).abs() < 1e-12);

        let (lag, state) = solve_lagrangian(&ClusterProblem::new(rho, 2).unwrap(), 200, 1e-4);
        assert_eq!(lag.selected(), &[0, 1]);
        assert!(state.bound >= lag.objective() - 1e-9);
    }

    #[test]
    fn inner_saturates_under_huge_multipliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_sim(5, &mut rng);
        let problem = ClusterProblem::new(rho, 2).unwrap();
        let u = vec![1e6; 5];
        let inner = evaluate_inner(&problem, &u);
        assert!((inner.value - 5e6).abs() < 1e-6);
        assert!(inner.assignment_counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn inner_assigns_everywhere_when_positive_and_unpriced() {
        let rho = sim_from_rows(&[
            vec![1.0, 0.4, 0.3],
            vec![0.4, 1.0, 0.2],
            vec![0.3, 0.2, 1.0],
        ]);
        let problem = ClusterProblem::new(rho, 2).unwrap();
        let inner = evaluate_inner(&problem, &[0.0; 3]);
        assert!(inner.assignment_counts.iter().all(|&c| c == 2));
    }

    /// Independent check of the inner closed form: enumerate all y-subsets
    /// and all per-cell x choices permitted by the relaxed constraints.
    fn inner_oracle(rho: &SimilarityMatrix, k: usize, u: &[f64]) -> f64 {
        fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for j in start..n {
                cur.push(j);
                rec(n, k, j + 1, cur, out);
                cur.pop();
            }
        }
        let n = rho.n();
        let mut subsets = Vec::new();
        rec(n, k, 0, &mut Vec::new(), &mut subsets);
        let constant: f64 = u.iter().sum();
        subsets
            .iter()
            .map(|sel| {
                // With y fixed, each cell x_ij is free in {0,1} for selected
                // j, so the optimum takes exactly the positive terms.
                let mut v = constant;
                for i in 0..n {
                    for &j in sel {
                        v += (rho.rho(i, j) - u[i]).max(0.0);
                    }
                }
                v
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn inner_matches_relaxed_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..10 {
            let rho = random_sim(6, &mut rng);
            let problem = ClusterProblem::new(rho.clone(), 2).unwrap();
            // The zero-multiplier value L(0) first, then random multipliers.
            let zero = evaluate_inner(&problem, &[0.0; 6]);
            assert!((zero.value - inner_oracle(&rho, 2, &[0.0; 6])).abs() < 1e-12);
            let u: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.5..0.8)).collect();
            let inner = evaluate_inner(&problem, &u);
            let expected = inner_oracle(&rho, 2, &u);
            assert!(
                (inner.value - expected).abs() < 1e-12,
                "trial {trial}: {} vs {expected}",
                inner.value
            );
        }
    }

    #[test]
    fn zero_subgradient_marks_convergence() {
        let mut state = LagrangianState::new(3);
        state.bound = 2.5;
        let inner = InnerSolution {
            value: 2.5,
            selected: vec![0, 2],
            assignment_counts: vec![1, 1, 1],
        };
        state.subgradient_step(&inner);
        assert!(state.converged);
    }

    #[test]
    fn over_assigned_rows_get_pricier() {
        // Stock 0 is claimed twice and stock 1 not at all; descending the
        // bound must raise u_0 and lower u_1.
        let mut state = LagrangianState::new(3);
        state.bound = 3.0;
        let rho = sim_from_rows(&[
            vec![1.0, 0.9, 0.1],
            vec![0.9, 1.0, 0.1],
            vec![0.1, 0.1, 1.0],
        ]);
        state.best_feasible = Some(ClusterSolution::from_selected(&rho, &[0, 2]));
        let inner = InnerSolution {
            value: 3.0,
            selected: vec![0, 1],
            assignment_counts: vec![2, 0, 1],
        };
        state.subgradient_step(&inner);
        assert!(state.multipliers[0] > 0.0);
        assert!(state.multipliers[1] < 0.0);
        assert_eq!(state.multipliers[2], 0.0);
    }

    #[test]
    fn weak_duality_sandwich_and_gap_quality() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut hits = 0;
        for _ in 0..10 {
            let rho = random_sim(8, &mut rng);
            let problem = ClusterProblem::new(rho, 3).unwrap();
            let exact = solve_exact(&problem).unwrap();
            let (feasible, state) = solve_lagrangian(&problem, 500, 1e-4);
            assert!(feasible.objective() <= exact.objective() + 1e-9);
            assert!(state.bound >= exact.objective() - 1e-9);
            if (state.bound - exact.objective()) / exact.objective() <= 0.05 {
                hits += 1;
            }
        }
        assert!(hits >= 9, "bound quality reached on {hits}/10 instances");
    }

    #[test]
    fn bound_is_monotone_and_duality_holds_for_random_multipliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_sim(8, &mut rng);
        let problem = ClusterProblem::new(rho.clone(), 3).unwrap();
        let exact = solve_exact(&problem).unwrap();

        for _ in 0..100 {
            let u: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let inner = evaluate_inner(&problem, &u);
            assert!(inner.value >= exact.objective() - 1e-9);
        }

        let mut state = LagrangianState::new(8);
        let mut last_bound = f64::INFINITY;
        for _ in 0..100 {
            let inner = evaluate_inner(&problem, &state.multipliers);
            state.observe_bound(inner.value);
            assert!(state.bound <= last_bound + 1e-15);
            last_bound = state.bound;
            let rounded = ClusterSolution::from_selected(&rho, &inner.selected);
            if state
                .best_feasible
                .as_ref()
                .is_none_or(|b| rounded.objective() > b.objective())
            {
                state.best_feasible = Some(rounded);
            }
            state.subgradient_step(&inner);
            if state.converged {
                break;
            }
        }
    }

    #[test]
    fn rounded_solutions_are_always_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let n = rng.gen_range(4..12);
            let k = rng.gen_range(1..=n);
            let rho = random_sim(n, &mut rng);
            let problem = ClusterProblem::new(rho.clone(), k).unwrap();
            let (sol, _) = solve_lagrangian(&problem, 50, 1e-4);
            assert_eq!(sol.k(), k);
            for (i, &a) in sol.assignment().iter().enumerate() {
                assert!(sol.selected().contains(&a));
                if sol.selected().contains(&i) {
                    assert_eq!(a, i, "representative must self-assign");
                }
            }
            let recomputed: f64 = (0..n).map(|i| rho.rho(i, sol.assignment()[i])).sum();
            assert!((recomputed - sol.objective()).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_equivariance_on_unique_optima() {
        // Symmetric matrices tie exactly whenever two stocks are mutual
        // best matches (either one represents the pair at the same
        // objective), so the selected-set check only applies to instances
        // whose optimum is unique by a clear margin; tied instances still
        // must agree on the objective.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut unique_seen = 0;
        for _ in 0..10 {
            let n = 7;
            let rho = random_sim(n, &mut rng);
            let problem = ClusterProblem::new(rho.clone(), 3).unwrap();
            let base = solve_exact(&problem).unwrap();

            // Margin between the best and second-best subsets.
            let mut values = Vec::new();
            let mut cur = Vec::new();
            fn collect(
                rho: &SimilarityMatrix,
                k: usize,
                start: usize,
                cur: &mut Vec<usize>,
                out: &mut Vec<f64>,
            ) {
                if cur.len() == k {
                    out.push(
                        (0..rho.n())
                            .map(|i| {
                                cur.iter()
                                    .map(|&j| rho.rho(i, j))
                                    .fold(f64::NEG_INFINITY, f64::max)
                            })
                            .sum(),
                    );
                    return;
                }
                for j in start..rho.n() {
                    cur.push(j);
                    collect(rho, k, j + 1, cur, out);
                    cur.pop();
                }
            }
            collect(&rho, 3, 0, &mut cur, &mut values);
            values.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let unique = values[0] - values[1] > 1e-9;

            // Reverse relabeling keeps the instance but permutes indices.
            let perm: Vec<usize> = (0..n).rev().collect();
            let mut pm = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    pm[(perm[i], perm[j])] = rho.rho(i, j);
                }
            }
            let permuted = SimilarityMatrix::from_matrix(pm).unwrap();
            let psol = solve_exact(&ClusterProblem::new(permuted, 3).unwrap()).unwrap();

            assert!((psol.objective() - base.objective()).abs() < 1e-9);
            if unique {
                unique_seen += 1;
                let mut mapped: Vec<usize> = base.selected().iter().map(|&j| perm[j]).collect();
                mapped.sort_unstable();
                assert_eq!(psol.selected(), mapped.as_slice());
            }
        }
        assert!(unique_seen >= 3, "want a few unique instances, saw {unique_seen}");
    }
}
