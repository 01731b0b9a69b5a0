//! Dense solvers for the two program shapes the learners need: least-l1-norm
//! under linear constraints (a linear program after variable splitting) and
//! constrained least squares (a convex quadratic program).
//!
//! Both solvers are deterministic: the simplex uses Bland's rule and the
//! active-set method breaks ties by lowest index, so identical inputs produce
//! identical output bit patterns. Infeasibility is a first-class result; the
//! learners consume it as a signal, not an error.

mod qp;
mod simplex;

pub use qp::constrained_lsq;

/// Feasibility tolerance for constraint residual checks. Loose enough to
/// absorb round-off accumulated over a long simplex path on ill-conditioned
/// data, and still three orders of magnitude below the smallest weight the
/// learners treat as meaningful.
pub const TOL_FEAS: f64 = 1e-6;

/// Linear constraints: exact equalities, per-coordinate bounds (entries may be
/// infinite), and an index set forced to zero.
#[derive(Debug, Clone)]
pub struct LinearConstraintSet {
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub fixed_zero: Vec<bool>,
}

impl LinearConstraintSet {
    /// Unconstrained set over `dim` variables.
    pub fn free(dim: usize) -> Self {
        Self {
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            lb: vec![f64::NEG_INFINITY; dim],
            ub: vec![f64::INFINITY; dim],
            fixed_zero: vec![false; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lb.len()
    }

    pub fn push_eq(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.dim());
        self.a_eq.push(row);
        self.b_eq.push(rhs);
    }

    fn check(&self) {
        let d = self.dim();
        assert_eq!(self.ub.len(), d);
        assert_eq!(self.fixed_zero.len(), d);
        assert_eq!(self.a_eq.len(), self.b_eq.len());
        assert!(self.a_eq.iter().all(|r| r.len() == d));
        assert!(self.lb.iter().zip(&self.ub).all(|(l, u)| l <= u), "lb must not exceed ub");
    }

    /// Largest constraint violation of `y`.
    pub fn residual(&self, y: &[f64]) -> f64 {
        let mut r = 0.0f64;
        for (row, &rhs) in self.a_eq.iter().zip(&self.b_eq) {
            let v: f64 = row.iter().zip(y).map(|(a, x)| a * x).sum();
            r = r.max((v - rhs).abs());
        }
        for j in 0..self.dim() {
            if self.fixed_zero[j] {
                r = r.max(y[j].abs());
            } else {
                r = r.max(self.lb[j] - y[j]).max(y[j] - self.ub[j]);
            }
        }
        r
    }
}

/// Solver outcome. `Optimal` carries the residual of the KKT conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveStatus {
    Optimal { kkt_residual: f64 },
    Infeasible,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_optimal(&self) -> bool {
        matches!(self, SolveStatus::Optimal { .. })
    }
}

/// Relative singular-value cutoff below which an equality row is treated as
/// dependent on the others.
const RANK_TOL: f64 = 1e-10;
/// Tolerance on the right-hand-side component outside the row space; a larger
/// component means the equalities contradict each other.
const CONSISTENCY_TOL: f64 = 1e-6;

/// Replaces the equality block with a numerically equivalent full-rank system
/// built from an SVD of the coefficient matrix: row `k` becomes
/// `sigma_k v_k' y = u_k' b`.
///
/// Trajectories of converging dynamics produce nearly collinear data rows;
/// feeding those to the simplex directly forces pivots on round-off-sized
/// entries and yields spurious infeasibility. Dependent rows are dropped
/// after checking that their right-hand sides agree with the kept rows;
/// disagreement is genuine infeasibility. Keeping the factor `sigma_k` on
/// the left (rather than dividing it into the right-hand side) means every
/// retained row is satisfied by the underlying exact solution to round-off
/// in `b`, however small its singular value — dividing by a tiny `sigma_k`
/// would instead demand a residual of (round-off / sigma_k), which the
/// tableau cannot deliver.
fn reduce_equalities(cons: &LinearConstraintSet) -> Result<LinearConstraintSet, simplex::LpFailure> {
    let m = cons.a_eq.len();
    if m <= 1 {
        return Ok(cons.clone());
    }
    let dim = cons.dim();
    let a = nalgebra::DMatrix::from_fn(m, dim, |r, c| cons.a_eq[r][c]);
    let b = nalgebra::DVector::from_fn(m, |r, _| cons.b_eq[r]);
    let svd = a.svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax && s > 0.0).count();
    // Component of b outside the retained row space.
    let mut b_perp = b.clone();
    for k in 0..rank {
        let uk = u.column(k);
        let proj = uk.dot(&b);
        b_perp -= uk * proj;
    }
    if b_perp.norm() > CONSISTENCY_TOL * b.norm().max(1.0) {
        if std::env::var("OPIDYN_LP_DEBUG").is_ok() {
            eprintln!("inconsistent equalities: |b_perp| {:.3e} rank {rank} of {m}", b_perp.norm());
        }
        return Err(simplex::LpFailure::Infeasible);
    }
    let mut out = cons.clone();
    out.a_eq = (0..rank)
        .map(|k| vt.row(k).iter().map(|v| v * svd.singular_values[k]).collect())
        .collect();
    out.b_eq = (0..rank).map(|k| u.column(k).dot(&b)).collect();
    Ok(out)
}

/// Minimizes `||y||_1` subject to `cons` by variable splitting and a dense
/// two-phase simplex with Bland's rule.
pub fn min_l1(dim: usize, cons: &LinearConstraintSet) -> (Vec<f64>, SolveStatus) {
    assert_eq!(cons.dim(), dim);
    cons.check();
    let reduced = match reduce_equalities(cons) {
        Ok(r) => r,
        Err(simplex::LpFailure::Infeasible) => return (vec![0.0; dim], SolveStatus::Infeasible),
        Err(simplex::LpFailure::Numerical) => return (vec![0.0; dim], SolveStatus::NumericalFailure),
    };
    match simplex::solve_l1(&reduced) {
        Ok((y, opt_gap)) => {
            let feas = reduced.residual(&y);
            if feas > TOL_FEAS {
                if std::env::var("OPIDYN_LP_DEBUG").is_ok() {
                    eprintln!("post-solve residual {feas:.3e}");
                }
                return (vec![0.0; dim], SolveStatus::NumericalFailure);
            }
            (y, SolveStatus::Optimal { kkt_residual: feas.max(opt_gap) })
        }
        Err(simplex::LpFailure::Infeasible) => (vec![0.0; dim], SolveStatus::Infeasible),
        Err(simplex::LpFailure::Numerical) => (vec![0.0; dim], SolveStatus::NumericalFailure),
    }
}

/// A feasible point of `cons`, or None when the set is empty.
pub(crate) fn find_feasible(cons: &LinearConstraintSet) -> Result<Vec<f64>, simplex::LpFailure> {
    cons.check();
    simplex::feasible_point(&reduce_equalities(cons)?)
}
