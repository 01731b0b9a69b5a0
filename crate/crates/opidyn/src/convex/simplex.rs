//! Dense two-phase simplex on the standard form produced by variable
//! splitting. Bland's rule (lowest index entering, lowest basis index on
//! ratio ties) makes every solve deterministic and cycle-free.

use super::LinearConstraintSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum LpFailure {
    Infeasible,
    Numerical,
}

/// Smallest tableau entry eligible as a pivot. Pivoting divides the row by
/// the entry, amplifying accumulated round-off by its reciprocal, so this
/// must stay well above machine epsilon times the iteration count; equality
/// rows from near-dependent data (scaled by their singular values) simply
/// stay inert rather than poisoning the tableau.
const PIVOT_TOL: f64 = 1e-6;
const COST_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;

/// One standard-form variable and its mapping back to an original coordinate:
/// contributes `sign * z` to `y[orig]`.
struct StdVar {
    orig: usize,
    sign: f64,
}

struct Standardized {
    /// Constraint matrix, row major, over all standard vars (incl. slacks).
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    vars: Vec<StdVar>,
    /// Per-original-variable constant offset (from bound shifting).
    shift: Vec<f64>,
}

/// Rewrites the constraint set over nonnegative variables. `l1_cost` selects
/// the l1 objective; otherwise all costs are zero (pure feasibility).
fn standardize(cons: &LinearConstraintSet, l1_cost: bool) -> Standardized {
    let dim = cons.dim();
    let mut vars: Vec<StdVar> = Vec::new();
    let mut cost: Vec<f64> = Vec::new();
    let mut shift = vec![0.0; dim];
    // cap[k] = finite upper bound on standard var k, handled as extra rows.
    let mut caps: Vec<(usize, f64)> = Vec::new();

    for j in 0..dim {
        if cons.fixed_zero[j] {
            continue;
        }
        let (lb, ub) = (cons.lb[j], cons.ub[j]);
        if lb >= 0.0 {
            // y = lb + z, z >= 0; |y| = y.
            let k = vars.len();
            vars.push(StdVar { orig: j, sign: 1.0 });
            cost.push(if l1_cost { 1.0 } else { 0.0 });
            shift[j] = lb;
            if ub.is_finite() {
                caps.push((k, ub - lb));
            }
        } else if ub <= 0.0 {
            // y = ub - z, z >= 0; |y| = -y.
            let k = vars.len();
            vars.push(StdVar { orig: j, sign: -1.0 });
            cost.push(if l1_cost { 1.0 } else { 0.0 });
            shift[j] = ub;
            if lb.is_finite() {
                caps.push((k, ub - lb));
            }
        } else {
            // lb < 0 < ub: split y = p - m.
            let kp = vars.len();
            vars.push(StdVar { orig: j, sign: 1.0 });
            cost.push(if l1_cost { 1.0 } else { 0.0 });
            if ub.is_finite() {
                caps.push((kp, ub));
            }
            let km = vars.len();
            vars.push(StdVar { orig: j, sign: -1.0 });
            cost.push(if l1_cost { 1.0 } else { 0.0 });
            if lb.is_finite() {
                caps.push((km, -lb));
            }
        }
    }

    let n_main = vars.len();
    let n_slack = caps.len();
    let n_total = n_main + n_slack;
    let mut a: Vec<Vec<f64>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();

    for (row, &rhs) in cons.a_eq.iter().zip(&cons.b_eq) {
        let mut r = vec![0.0; n_total];
        for (k, v) in vars.iter().enumerate() {
            r[k] = row[v.orig] * v.sign;
        }
        let adj: f64 = (0..dim).map(|j| row[j] * shift[j]).sum();
        a.push(r);
        b.push(rhs - adj);
    }
    for (s, &(k, cap)) in caps.iter().enumerate() {
        let mut r = vec![0.0; n_total];
        r[k] = 1.0;
        r[n_main + s] = 1.0;
        a.push(r);
        b.push(cap);
    }
    for _ in 0..n_slack {
        cost.push(0.0);
    }

    Standardized { a, b, cost, vars, shift }
}

struct Tableau {
    /// Rows over n_total + m columns (artificials appended).
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    n_real: usize,
}

impl Tableau {
    fn new(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Self {
        let m = a.len();
        let n_real = a.first().map_or(0, |r| r.len());
        for (r, row) in a.iter_mut().enumerate() {
            if b[r] < 0.0 {
                for v in row.iter_mut() {
                    *v = -*v;
                }
                b[r] = -b[r];
            }
            row.extend((0..m).map(|k| if k == r { 1.0 } else { 0.0 }));
        }
        let basis = (n_real..n_real + m).collect();
        Tableau { rows: a, rhs: b, basis, n_real }
    }

    fn ncols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        for i in 0..self.rows.len() {
            if i != r {
                let f = self.rows[i][c];
                if f != 0.0 {
                    for k in 0..self.ncols() {
                        self.rows[i][k] -= f * self.rows[r][k];
                    }
                    self.rhs[i] -= f * self.rhs[r];
                }
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs for objective `cost` (indexed over all columns).
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.rows.len();
        let n = self.ncols();
        let mut red = cost.to_vec();
        for r in 0..m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for k in 0..n {
                    red[k] -= cb * self.rows[r][k];
                }
            }
        }
        red
    }

    /// Bland iteration loop for min cost'x. `allowed` filters entering
    /// columns. Returns the final max optimality violation.
    fn optimize(&mut self, cost: &[f64], allowed: impl Fn(usize) -> bool) -> Result<f64, LpFailure> {
        let max_iters = 100 * (self.rows.len() + self.ncols() + 10);
        for _ in 0..max_iters {
            let red = self.reduced_costs(cost);
            let entering = (0..self.ncols()).find(|&k| allowed(k) && red[k] < -COST_TOL);
            let Some(c) = entering else {
                let gap = (0..self.ncols())
                    .filter(|&k| allowed(k))
                    .fold(0.0f64, |g, k| g.max(-red[k]));
                return Ok(gap);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[r] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, best)) => {
                            if ratio < best - 1e-12
                                || (ratio < best + 1e-12 && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                // Unbounded; cannot happen for the l1 objective, treat as a
                // numerical breakdown.
                if std::env::var("OPIDYN_LP_DEBUG").is_ok() {
                    eprintln!("unbounded pivot on column {c}");
                }
                return Err(LpFailure::Numerical);
            };
            self.pivot(r, c);
        }
        if std::env::var("OPIDYN_LP_DEBUG").is_ok() {
            eprintln!("simplex hit iteration cap {max_iters}");
        }
        Err(LpFailure::Numerical)
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        (0..self.rows.len()).map(|r| cost[self.basis[r]] * self.rhs[r]).sum()
    }

    fn solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_real];
        for (r, &col) in self.basis.iter().enumerate() {
            if col < self.n_real {
                x[col] = self.rhs[r];
            }
        }
        x
    }
}

/// Phase 1: find a basic feasible solution or report infeasibility.
fn phase1(tab: &mut Tableau) -> Result<(), LpFailure> {
    let n_real = tab.n_real;
    let n_total = tab.ncols();
    let mut cost = vec![0.0; n_total];
    for c in cost.iter_mut().skip(n_real) {
        *c = 1.0;
    }
    tab.optimize(&cost, |_| true)?;
    if tab.objective(&cost) > PHASE1_TOL {
        if std::env::var("OPIDYN_LP_DEBUG").is_ok() {
            eprintln!("phase1 objective {:.3e} rows {} cols {}", tab.objective(&cost), tab.rows.len(), tab.ncols());
        }
        return Err(LpFailure::Infeasible);
    }
    // Drive remaining artificials out of the basis; a row that cannot pivot
    // on any real column is redundant and gets dropped.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n_real {
            if let Some(c) = (0..n_real).find(|&c| tab.rows[r][c].abs() > PIVOT_TOL) {
                tab.pivot(r, c);
                r += 1;
            } else {
                tab.rows.remove(r);
                tab.rhs.remove(r);
                tab.basis.remove(r);
            }
        } else {
            r += 1;
        }
    }
    Ok(())
}

fn recover(std: &Standardized, x: &[f64]) -> Vec<f64> {
    let mut y = std.shift.clone();
    for (k, v) in std.vars.iter().enumerate() {
        y[v.orig] += v.sign * x[k];
    }
    for (j, v) in y.iter_mut().enumerate() {
        // fixed_zero coordinates carry no standard var and no shift.
        if std.shift[j] == 0.0 && !std.vars.iter().any(|sv| sv.orig == j) {
            *v = 0.0;
        }
    }
    y
}

/// Minimum-l1 solve. Returns `(y, optimality_gap)`.
pub(crate) fn solve_l1(cons: &LinearConstraintSet) -> Result<(Vec<f64>, f64), LpFailure> {
    let std = standardize(cons, true);
    if std.vars.is_empty() {
        // Everything fixed; feasible iff the equalities hold at y = shift.
        let y = recover(&std, &[]);
        return if cons.residual(&y) <= super::TOL_FEAS {
            Ok((y, 0.0))
        } else {
            Err(LpFailure::Infeasible)
        };
    }
    if std.a.is_empty() {
        // No rows: each coordinate sits at its nearest-to-zero bound.
        return Ok((recover(&std, &vec![0.0; std.vars.len()]), 0.0));
    }
    let mut tab = Tableau::new(std.a.clone(), std.b.clone());
    phase1(&mut tab)?;
    let n_real = tab.n_real;
    let mut cost = std.cost.clone();
    cost.resize(tab.ncols(), f64::INFINITY);
    let gap = tab.optimize(&cost, |k| k < n_real)?;
    Ok((recover(&std, &tab.solution()), gap))
}

/// Feasibility-only solve (phase 1).
pub(crate) fn feasible_point(cons: &LinearConstraintSet) -> Result<Vec<f64>, LpFailure> {
    let std = standardize(cons, false);
    if std.vars.is_empty() {
        let y = recover(&std, &[]);
        return if cons.residual(&y) <= super::TOL_FEAS {
            Ok(y)
        } else {
            Err(LpFailure::Infeasible)
        };
    }
    if std.a.is_empty() {
        return Ok(recover(&std, &vec![0.0; std.vars.len()]));
    }
    let mut tab = Tableau::new(std.a.clone(), std.b.clone());
    phase1(&mut tab)?;
    Ok(recover(&std, &tab.solution()))
}
