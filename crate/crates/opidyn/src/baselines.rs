//! Regression baselines: box-constrained ordinary least squares, sparse
//! solutions to the exact data equations, and Gaussian-process regression.
//! Random search is a bandit configuration, not separate code.

use nalgebra::{DMatrix, DVector};

use crate::convex::{min_l1, LinearConstraintSet, SolveStatus};
use crate::dynamics::Trajectory;

/// Half-width of the coefficient box searched by OLS and SS.
pub const COEFF_BOX: f64 = 2.0;

/// Per-agent regression design: rows `[x(t), x_i(0)]`, targets `x_i(t+1)`.
/// The appended column folds the initial-state anchor of stubborn agents
/// into a linear model.
#[derive(Debug, Clone)]
pub struct AugmentedDesign {
    pub rows: Vec<Vec<f64>>,
    pub target: Vec<f64>,
}

impl AugmentedDesign {
    pub fn from_trajectory(traj: &Trajectory, i: usize) -> Self {
        let t = traj.horizon();
        let x_i0 = traj.state(0)[i];
        let rows = (0..t)
            .map(|k| {
                let mut r = traj.state(k).to_vec();
                r.push(x_i0);
                r
            })
            .collect();
        AugmentedDesign { rows, target: traj.targets(i, 0, t) }
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }
}

fn boxed(dim: usize) -> LinearConstraintSet {
    let mut cons = LinearConstraintSet::free(dim);
    for j in 0..dim {
        cons.lb[j] = -COEFF_BOX;
        cons.ub[j] = COEFF_BOX;
    }
    cons
}

/// Relative singular-value cutoff for the OLS design matrix. Converging
/// trajectories make the design numerically rank-deficient; coefficients
/// along quasi-null directions are round-off artifacts that extrapolate
/// wildly, so they are dropped before solving.
pub const OLS_RANK_REL_TOL: f64 = 5e-4;

/// Least squares on the numerically identifiable subspace of the design,
/// with coefficients clamped to `[-2, 2]^{n+1}`.
///
/// A boxed quadratic program over the full space is ill-posed here: the
/// minimizer set is a high-dimensional polytope and any selected vertex
/// carries arbitrary weights on directions the data cannot resolve. The
/// truncated solve keeps only directions whose singular values clear a
/// relative threshold, which is the standard stabilization for
/// rank-deficient least squares, and the box then enforces the same weight
/// bound the other baselines use.
pub fn ols_fit(design: &AugmentedDesign) -> (Vec<f64>, SolveStatus) {
    let rows = design.rows.len();
    let dim = design.dim();
    let a = DMatrix::from_fn(rows, dim, |r, c| design.rows[r][c]);
    let b = DVector::from_iterator(rows, design.target.iter().cloned());
    let svd = a.svd(true, true);
    let eps = OLS_RANK_REL_TOL * svd.singular_values[0].max(1.0);
    let sol = svd.solve(&b, eps).expect("svd requested with both factors");
    let y = sol.iter().map(|v| v.clamp(-COEFF_BOX, COEFF_BOX)).collect();
    (y, SolveStatus::Optimal { kkt_residual: 0.0 })
}

/// Sparse solution: minimum l1 norm subject to the exact data equations
/// inside the same box. Infeasible when no boxed coefficient vector
/// reproduces the targets exactly.
pub fn ss_fit(design: &AugmentedDesign) -> (Vec<f64>, SolveStatus) {
    let dim = design.dim();
    let mut cons = boxed(dim);
    for (row, &t) in design.rows.iter().zip(&design.target) {
        cons.push_eq(row.clone(), t);
    }
    min_l1(dim, &cons)
}

/// Adjacency row from the first `n` coefficients by magnitude thresholding.
///
/// Unconstrained regression smears small weights over every coordinate, so
/// unlike the sparse learners the cut-off must sit at a meaningful weight
/// level: an edge is reported when its coefficient reaches the uniform-mixing
/// weight `1/n`.
pub fn coeff_adjacency_row(coeffs: &[f64], n: usize) -> Vec<i8> {
    let tau = 1.0 / n as f64;
    coeffs[..n]
        .iter()
        .map(|&v| {
            if v.abs() <= tau {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Gaussian-process regression with a squared-exponential kernel.
/// `length_scale = None` selects the median pairwise training-input
/// distance (falling back to 1 when that is zero).
pub struct GprModel {
    train: Vec<Vec<f64>>,
    alpha: DVector<f64>,
    length_scale: f64,
}

fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn median_length_scale(inputs: &[Vec<f64>]) -> f64 {
    let mut dists: Vec<f64> = Vec::new();
    for a in 0..inputs.len() {
        for b in (a + 1)..inputs.len() {
            dists.push(sq_dist(&inputs[a], &inputs[b]).sqrt());
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = dists.len();
    let med = if m % 2 == 1 { dists[m / 2] } else { 0.5 * (dists[m / 2 - 1] + dists[m / 2]) };
    if med > 0.0 {
        med
    } else {
        1.0
    }
}

impl GprModel {
    pub fn fit(inputs: &[Vec<f64>], targets: &[f64], sigma2: f64, length_scale: Option<f64>) -> Self {
        assert!(!inputs.is_empty());
        assert_eq!(inputs.len(), targets.len());
        let ell = length_scale.unwrap_or_else(|| median_length_scale(inputs));
        let m = inputs.len();
        let mut k = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                k[(a, b)] = (-sq_dist(&inputs[a], &inputs[b]) / (2.0 * ell * ell)).exp();
            }
            k[(a, a)] += sigma2;
        }
        let y = DVector::from_column_slice(targets);
        let chol = k.cholesky().expect("kernel matrix with positive noise is positive definite");
        let alpha = chol.solve(&y);
        GprModel { train: inputs.to_vec(), alpha, length_scale: ell }
    }

    pub fn predict(&self, query: &[f64]) -> f64 {
        self.train
            .iter()
            .zip(self.alpha.iter())
            .map(|(u, &a)| a * (-sq_dist(u, query) / (2.0 * self.length_scale * self.length_scale)).exp())
            .sum()
    }
}

/// Convenience wrapper: fit per call and evaluate every query.
pub fn gpr_fit_predict(
    inputs: &[Vec<f64>],
    targets: &[f64],
    queries: &[Vec<f64>],
    sigma2: f64,
    length_scale: Option<f64>,
) -> Vec<f64> {
    let model = GprModel::fit(inputs, targets, sigma2, length_scale);
    queries.iter().map(|q| model.predict(q)).collect()
}
