//! Constrained least squares via a primal active-set method.
//!
//! Minimizes `||X y - b||^2` over equality constraints and bounds. Equality
//! subproblems are solved through the KKT system with an SVD, so a singular
//! Gram matrix (fewer samples than free variables) picks the minimum-norm
//! step deterministically. The feasible starting point comes from the simplex
//! phase-1 routine, which also provides infeasibility detection.

use nalgebra::{DMatrix, DVector};

use super::{find_feasible, simplex::LpFailure, LinearConstraintSet, SolveStatus};

const STEP_TOL: f64 = 1e-11;
const MULT_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-9;
const SVD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ActiveBound {
    Lower,
    Upper,
}

pub fn constrained_lsq(x: &[Vec<f64>], b: &[f64], cons: &LinearConstraintSet) -> (Vec<f64>, SolveStatus) {
    assert_eq!(x.len(), b.len(), "row count of X must match b");
    let dim = cons.dim();
    assert!(x.iter().all(|r| r.len() == dim));

    let mut y = match find_feasible(cons) {
        Ok(y) => y,
        Err(LpFailure::Infeasible) => return (vec![0.0; dim], SolveStatus::Infeasible),
        Err(LpFailure::Numerical) => return (vec![0.0; dim], SolveStatus::NumericalFailure),
    };
    // Snap onto bounds so the initial active set is clean.
    for j in 0..dim {
        if cons.fixed_zero[j] {
            y[j] = 0.0;
        } else {
            if (y[j] - cons.lb[j]).abs() <= BOUND_TOL {
                y[j] = cons.lb[j];
            }
            if (y[j] - cons.ub[j]).abs() <= BOUND_TOL {
                y[j] = cons.ub[j];
            }
        }
    }

    let xm = DMatrix::from_fn(x.len(), dim, |r, c| x[r][c]);
    let bv = DVector::from_column_slice(b);
    let n_eq = cons.a_eq.len();
    let am = DMatrix::from_fn(n_eq, dim, |r, c| cons.a_eq[r][c]);

    let mut active: Vec<Option<ActiveBound>> = (0..dim)
        .map(|j| {
            if cons.fixed_zero[j] {
                Some(ActiveBound::Lower)
            } else if y[j] == cons.lb[j] && cons.lb[j].is_finite() {
                Some(ActiveBound::Lower)
            } else if y[j] == cons.ub[j] && cons.ub[j].is_finite() {
                Some(ActiveBound::Upper)
            } else {
                None
            }
        })
        .collect();

    let grad = |y: &[f64]| -> DVector<f64> {
        let yv = DVector::from_column_slice(y);
        let r = &xm * &yv - &bv;
        2.0 * xm.transpose() * r
    };

    let max_iters = 100 * (dim + n_eq + 5);
    for _ in 0..max_iters {
        let free: Vec<usize> = (0..dim)
            .filter(|&j| !cons.fixed_zero[j] && active[j].is_none())
            .collect();
        let g = grad(&y);

        // Equality-constrained step on the free coordinates.
        let (d_free, mu) = if free.is_empty() {
            // No step possible; multipliers from a least-squares fit over all
            // coordinates.
            let mu = if n_eq > 0 {
                let at = am.transpose();
                at.clone()
                    .svd(true, true)
                    .solve(&(-&g), SVD_EPS)
                    .unwrap_or_else(|_| DVector::zeros(n_eq))
            } else {
                DVector::zeros(0)
            };
            (DVector::zeros(0), mu)
        } else {
            let nf = free.len();
            let xf = xm.select_columns(free.iter());
            let af = am.select_columns(free.iter());
            let h = 2.0 * xf.transpose() * &xf;
            let mut k = DMatrix::zeros(nf + n_eq, nf + n_eq);
            k.view_mut((0, 0), (nf, nf)).copy_from(&h);
            k.view_mut((0, nf), (nf, n_eq)).copy_from(&af.transpose());
            k.view_mut((nf, 0), (n_eq, nf)).copy_from(&af);
            let mut rhs = DVector::zeros(nf + n_eq);
            for (a, &j) in free.iter().enumerate() {
                rhs[a] = -g[j];
            }
            let sol = match k.svd(true, true).solve(&rhs, SVD_EPS) {
                Ok(s) => s,
                Err(_) => return (vec![0.0; dim], SolveStatus::NumericalFailure),
            };
            (sol.rows(0, nf).into_owned(), sol.rows(nf, n_eq).into_owned())
        };

        let step_norm = d_free.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if step_norm <= STEP_TOL {
            // Check multipliers of active bounds (fixed-zero coordinates are
            // permanently pinned and skipped).
            let atmu = if n_eq > 0 { am.transpose() * &mu } else { DVector::zeros(dim) };
            let mut worst: Option<(usize, f64)> = None;
            for j in 0..dim {
                if cons.fixed_zero[j] {
                    continue;
                }
                let lam = match active[j] {
                    Some(ActiveBound::Lower) => g[j] + atmu[j],
                    Some(ActiveBound::Upper) => -(g[j] + atmu[j]),
                    None => continue,
                };
                if lam < -MULT_TOL && worst.map_or(true, |(_, w)| lam < w) {
                    worst = Some((j, lam));
                }
            }
            match worst {
                Some((j, _)) => {
                    active[j] = None;
                    continue;
                }
                None => {
                    // Optimal. Assemble the KKT residual.
                    let mut kkt = cons.residual(&y);
                    for (a, &j) in free.iter().enumerate() {
                        let _ = a;
                        let station = g[j] + if n_eq > 0 { (am.transpose() * &mu)[j] } else { 0.0 };
                        kkt = kkt.max(station.abs());
                    }
                    return (y, SolveStatus::Optimal { kkt_residual: kkt });
                }
            }
        }

        // Ratio test against the inactive bounds of free coordinates.
        let mut alpha = 1.0f64;
        let mut blocking: Option<(usize, ActiveBound)> = None;
        for (a, &j) in free.iter().enumerate() {
            let d = d_free[a];
            if d > STEP_TOL && cons.ub[j].is_finite() {
                let step = (cons.ub[j] - y[j]) / d;
                if step < alpha - 1e-15 {
                    alpha = step.max(0.0);
                    blocking = Some((j, ActiveBound::Upper));
                }
            } else if d < -STEP_TOL && cons.lb[j].is_finite() {
                let step = (cons.lb[j] - y[j]) / d;
                if step < alpha - 1e-15 {
                    alpha = step.max(0.0);
                    blocking = Some((j, ActiveBound::Lower));
                }
            }
        }
        for (a, &j) in free.iter().enumerate() {
            y[j] += alpha * d_free[a];
        }
        if let Some((j, which)) = blocking {
            y[j] = match which {
                ActiveBound::Lower => cons.lb[j],
                ActiveBound::Upper => cons.ub[j],
            };
            active[j] = Some(which);
        }
    }
    (vec![0.0; dim], SolveStatus::NumericalFailure)
}
