//! Per-agent single-rule learners.
//!
//! The l1 family solves least-l1-norm programs with the exact data equations
//! `X y = b` as hard constraints, so infeasibility is a meaningful signal
//! (e.g. a true neighbor was forced to zero on noiseless data). The
//! least-squares family keeps the constraint blocks but swaps the objective
//! for `||X y - b||^2` and drops the data equalities. The HK learner is a
//! sorting heuristic that brackets the confidence bound from above.

use crate::convex::{constrained_lsq, min_l1, LinearConstraintSet, SolveStatus};
use crate::dynamics::{step_degroot, step_fj, step_hk, step_repell, RuleType};

/// Estimated weights with magnitude at most this are treated as zero when
/// forming adjacency rows.
pub const TAU_SUPP: f64 = 1e-6;

/// Forced neighbor / non-neighbor sets. `neigh` always contains the agent
/// itself at call sites; the sets are disjoint.
#[derive(Debug, Clone, Default)]
pub struct NeighborHints {
    pub neigh: Vec<usize>,
    pub non: Vec<usize>,
}

impl NeighborHints {
    pub fn new(mut neigh: Vec<usize>, mut non: Vec<usize>) -> Self {
        neigh.sort_unstable();
        neigh.dedup();
        non.sort_unstable();
        non.dedup();
        debug_assert!(neigh.iter().all(|j| !non.contains(j)), "neigh and non must be disjoint");
        Self { neigh, non }
    }

    pub fn self_only(i: usize) -> Self {
        Self { neigh: vec![i], non: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LearnerConfig {
    /// Lower bound enforced on forced-neighbor weights.
    pub eps_w: f64,
    /// Susceptibility margin: lambda is kept in `[eps_lambda, 1 - eps_lambda]`.
    pub eps_lambda: f64,
    /// Strictness margin subtracted from HK bound estimates.
    pub eps_c: f64,
    /// Floor applied to validation errors before logarithms.
    pub err_floor: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self { eps_w: 0.001, eps_lambda: 0.1, eps_c: 1e-6, err_floor: 1e-12 }
    }
}

/// One learner outcome: adjacency row, parameter estimate, solver status.
/// `val_err` is filled by the caller via [`validation_error`].
#[derive(Debug, Clone)]
pub struct LearnResult {
    pub row: Vec<i8>,
    pub theta: Vec<f64>,
    pub status: SolveStatus,
    pub val_err: f64,
}

impl LearnResult {
    /// Placeholder for a failed learn: self loop only, infinite error.
    pub fn failed(n: usize, i: usize, status: SolveStatus) -> Self {
        let mut row = vec![0i8; n];
        row[i] = 1;
        Self { row, theta: Vec::new(), status, val_err: f64::INFINITY }
    }
}

fn indicator_row(y: &[f64]) -> Vec<i8> {
    y.iter().map(|&v| if v > TAU_SUPP { 1 } else { 0 }).collect()
}

fn sign_row(y: &[f64]) -> Vec<i8> {
    y.iter()
        .map(|&v| {
            if v.abs() <= TAU_SUPP {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Least-l1-norm DeGroot learner: `X y = b`, `1'y = 1`, forced neighbors
/// bounded below, non-neighbors zero, everything else nonnegative.
pub fn learn_degroot(x: &[Vec<f64>], b_i: &[f64], hints: &NeighborHints, cfg: &LearnerConfig) -> LearnResult {
    let n = x[0].len();
    let mut cons = LinearConstraintSet::free(n);
    for (row, &bt) in x.iter().zip(b_i) {
        cons.push_eq(row.clone(), bt);
    }
    cons.push_eq(vec![1.0; n], 1.0);
    for j in 0..n {
        cons.lb[j] = 0.0;
    }
    for &j in &hints.neigh {
        cons.lb[j] = cfg.eps_w;
    }
    for &j in &hints.non {
        cons.fixed_zero[j] = true;
        cons.lb[j] = f64::NEG_INFINITY;
    }
    let (y, status) = min_l1(n, &cons);
    if !status.is_optimal() {
        return LearnResult::failed(n, hints.neigh[0], status);
    }
    LearnResult { row: indicator_row(&y), theta: y, status, val_err: f64::NAN }
}

fn fj_augment(x: &[Vec<f64>], x_i0: f64) -> Vec<Vec<f64>> {
    x.iter()
        .map(|row| {
            let mut r = row.clone();
            r.push(x_i0);
            r
        })
        .collect()
}

fn fj_constraints(n: usize, hints: &NeighborHints, cfg: &LearnerConfig) -> LinearConstraintSet {
    let mut cons = LinearConstraintSet::free(n + 1);
    cons.push_eq(vec![1.0; n + 1], 1.0);
    for &j in &hints.neigh {
        cons.lb[j] = cfg.eps_w * cfg.eps_lambda;
    }
    for &j in &hints.non {
        cons.fixed_zero[j] = true;
    }
    cons.lb[n] = cfg.eps_lambda;
    cons.ub[n] = 1.0 - cfg.eps_lambda;
    cons
}

fn fj_unpack(n: usize, y: Vec<f64>, status: SolveStatus) -> LearnResult {
    let residual = 1.0 - y[n];
    debug_assert!(residual > 0.0, "susceptibility bounds keep 1 - y_{{n+1}} positive");
    let mut theta: Vec<f64> = y[..n].iter().map(|v| v / residual).collect();
    theta.push(residual);
    LearnResult { row: indicator_row(&y[..n]), theta, status, val_err: f64::NAN }
}

/// Least-l1-norm FJ learner on the design augmented with the constant column
/// `x_i(0) 1`. The solved vector is `[lambda w; 1 - lambda]`; the returned
/// theta is `[w; lambda]`.
pub fn learn_fj(
    x: &[Vec<f64>],
    b_i: &[f64],
    x_i0: f64,
    hints: &NeighborHints,
    cfg: &LearnerConfig,
) -> LearnResult {
    let n = x[0].len();
    let aug = fj_augment(x, x_i0);
    let mut cons = fj_constraints(n, hints, cfg);
    // Nonnegativity on all opinion weights (only the hint sets tighten it).
    for j in 0..n {
        if !cons.fixed_zero[j] && cons.lb[j] == f64::NEG_INFINITY {
            cons.lb[j] = 0.0;
        }
    }
    for (row, &bt) in aug.iter().zip(b_i) {
        cons.push_eq(row.clone(), bt);
    }
    let (y, status) = min_l1(n + 1, &cons);
    if !status.is_optimal() {
        return LearnResult::failed(n, hints.neigh[0], status);
    }
    fj_unpack(n, y, status)
}

/// Least-l1-norm repelling learner: no simplex constraint, no sign
/// constraints; the adjacency row carries the signs of the solution.
pub fn learn_repell(x: &[Vec<f64>], b_i: &[f64], hints: &NeighborHints, _cfg: &LearnerConfig) -> LearnResult {
    let n = x[0].len();
    let mut cons = LinearConstraintSet::free(n);
    for (row, &bt) in x.iter().zip(b_i) {
        cons.push_eq(row.clone(), bt);
    }
    // Neighbor hints carry no sign information here: repelling weights may
    // be negative, so only non-neighbors constrain the program.
    for &j in &hints.non {
        cons.fixed_zero[j] = true;
    }
    repell_box(&mut cons);
    let (y, status) = min_l1(n, &cons);
    if !status.is_optimal() {
        return LearnResult::failed(n, hints.neigh[0], status);
    }
    // min_l1 returns the smallest-l1 interpolant, so exceeding the bound
    // means no admissible interpolant exists at all.
    if !repell_admissible(&y) {
        return LearnResult::failed(n, hints.neigh[0], SolveStatus::Infeasible);
    }
    LearnResult { row: sign_row(&y), theta: y, status, val_err: f64::NAN }
}

/// Admissibility bound on the l1 norm of a repelling row. A repelling row
/// sums to one, so its l1 norm is 1 plus twice the total negative mass,
/// and the bounded-influence assumption (influence strength at most 0.2
/// spread over the neighborhood) keeps that mass below 0.2, i.e. the l1
/// norm below 1.4; the bound leaves a little slack. Estimates above it
/// cannot come from an admissible repelling agent; they are near-singular
/// interpolations of data produced by some other rule, and they
/// extrapolate wildly, so the learners discard them as infeasible.
pub const REPELL_L1_MAX: f64 = 1.5;

fn repell_admissible(y: &[f64]) -> bool {
    y.iter().map(|v| v.abs()).sum::<f64>() <= REPELL_L1_MAX
}

/// Coefficient box for the signed learners, matching the search box of the
/// regression baselines. Any admissible repelling row lies well inside it;
/// data only explainable by larger weights is treated as infeasible rather
/// than interpolated with wild coefficients.
fn repell_box(cons: &mut LinearConstraintSet) {
    for j in 0..cons.dim() {
        if !cons.fixed_zero[j] {
            cons.lb[j] = -2.0;
            cons.ub[j] = 2.0;
        }
    }
}

/// HK confidence-bound heuristic. The adjacency row is fixed to the hinted
/// neighbor set; each sample yields a strict upper bound on the confidence
/// bound and the smallest one is returned.
pub fn learn_hk(x: &[Vec<f64>], b_i: &[f64], i: usize, hints: &NeighborHints, cfg: &LearnerConfig) -> LearnResult {
    let n = x[0].len();
    assert!(hints.neigh.contains(&i), "agent must be among its hinted neighbors");
    let mut row = vec![0i8; n];
    for &j in &hints.neigh {
        row[j] = 1;
    }
    let n_i = hints.neigh.len();
    let mut c_star = f64::INFINITY;
    for (xt, &target) in x.iter().zip(b_i) {
        let xi = xt[i];
        // Sort hinted neighbors by opinion distance; the agent comes first,
        // remaining ties break by ascending index.
        let mut order: Vec<usize> = hints.neigh.clone();
        order.sort_by(|&a, &b| {
            let da = (xt[a] - xi).abs();
            let db = (xt[b] - xi).abs();
            let key = |j: usize, d: f64| (d, if j == i { -1i64 } else { j as i64 });
            key(a, da).partial_cmp(&key(b, db)).unwrap()
        });
        // Prefix means and the largest index matching the next state best.
        let mut best = f64::INFINITY;
        let mut m_t = 1usize;
        let mut prefix = 0.0;
        for (m, &j) in order.iter().enumerate() {
            prefix += xt[j];
            let mean = prefix / (m + 1) as f64;
            let diff = (mean - target).abs();
            if diff <= best {
                best = diff;
                m_t = m + 1;
            }
        }
        let c_t = if m_t == n_i {
            f64::INFINITY
        } else {
            (xt[order[m_t]] - xi).abs() - cfg.eps_c
        };
        c_star = c_star.min(c_t);
    }
    if c_star == f64::INFINITY {
        // Every neighbor stayed inside the bound at every sample: trust
        // everyone, clamped to twice the observed opinion range.
        let range = x
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        c_star = 2.0 * range;
    }
    c_star = c_star.max(0.0);
    LearnResult {
        row,
        theta: vec![c_star],
        status: SolveStatus::Optimal { kkt_residual: 0.0 },
        val_err: f64::NAN,
    }
}

/// Least-l1-norm repelling learner with the sum-to-one constraint added;
/// used by the refined initialization.
pub fn learn_repell_plus(x: &[Vec<f64>], b_i: &[f64], hints: &NeighborHints, _cfg: &LearnerConfig) -> LearnResult {
    let n = x[0].len();
    let mut cons = LinearConstraintSet::free(n);
    for (row, &bt) in x.iter().zip(b_i) {
        cons.push_eq(row.clone(), bt);
    }
    cons.push_eq(vec![1.0; n], 1.0);
    for &j in &hints.non {
        cons.fixed_zero[j] = true;
    }
    repell_box(&mut cons);
    let (y, status) = min_l1(n, &cons);
    if !status.is_optimal() {
        return LearnResult::failed(n, hints.neigh[0], status);
    }
    if !repell_admissible(&y) {
        return LearnResult::failed(n, hints.neigh[0], SolveStatus::Infeasible);
    }
    LearnResult { row: sign_row(&y), theta: y, status, val_err: f64::NAN }
}

/// Adjacency row fixed to the hinted neighbor set: the least-squares
/// learners do not re-decide the support, their input does.
fn hint_row(n: usize, hints: &NeighborHints) -> Vec<i8> {
    let mut row = vec![0i8; n];
    for &j in &hints.neigh {
        row[j] = 1;
    }
    row
}

/// Constrained-least-squares DeGroot learner: simplex constraint plus the
/// hint sets; coordinates outside the hints stay free.
pub fn learn_degroot_ls(x: &[Vec<f64>], b_i: &[f64], hints: &NeighborHints, cfg: &LearnerConfig) -> LearnResult {
    let n = x[0].len();
    let mut cons = LinearConstraintSet::free(n);
    cons.push_eq(vec![1.0; n], 1.0);
    for &j in &hints.neigh {
        cons.lb[j] = cfg.eps_w;
    }
    for &j in &hints.non {
        cons.fixed_zero[j] = true;
        cons.lb[j] = f64::NEG_INFINITY;
    }
    let (y, status) = constrained_lsq(x, b_i, &cons);
    if !status.is_optimal() {
        return LearnResult::failed(n, hints.neigh[0], status);
    }
    LearnResult { row: hint_row(n, hints), theta: y, status, val_err: f64::NAN }
}

/// Constrained-least-squares FJ learner; same constraint block and return
/// map as the l1 variant.
pub fn learn_fj_ls(
    x: &[Vec<f64>],
    b_i: &[f64],
    x_i0: f64,
    hints: &NeighborHints,
    cfg: &LearnerConfig,
) -> LearnResult {
    let n = x[0].len();
    let aug = fj_augment(x, x_i0);
    let cons = fj_constraints(n, hints, cfg);
    let (y, status) = constrained_lsq(&aug, b_i, &cons);
    if !status.is_optimal() {
        return LearnResult::failed(n, hints.neigh[0], status);
    }
    let mut res = fj_unpack(n, y, status);
    res.row = hint_row(n, hints);
    res
}

/// Constrained-least-squares repelling learner: simplex constraint and
/// zero-fixing only (no lower bound on forced neighbors).
pub fn learn_repell_ls(x: &[Vec<f64>], b_i: &[f64], hints: &NeighborHints, _cfg: &LearnerConfig) -> LearnResult {
    let n = x[0].len();
    let mut cons = LinearConstraintSet::free(n);
    cons.push_eq(vec![1.0; n], 1.0);
    for &j in &hints.non {
        cons.fixed_zero[j] = true;
    }
    repell_box(&mut cons);
    let (y, status) = constrained_lsq(x, b_i, &cons);
    if !status.is_optimal() {
        return LearnResult::failed(n, hints.neigh[0], status);
    }
    if !repell_admissible(&y) {
        return LearnResult::failed(n, hints.neigh[0], SolveStatus::Infeasible);
    }
    // Support fixed by the hints; only the signs come from the estimate.
    let row = hint_row(n, hints)
        .iter()
        .enumerate()
        .map(|(j, &p)| if p != 0 && y[j] < 0.0 { -1 } else { p })
        .collect();
    LearnResult { row, theta: y, status, val_err: f64::NAN }
}

/// One-step prediction with estimated parameters.
pub fn predict(rule: RuleType, theta: &[f64], row: &[i8], x: &[f64], i: usize, x_i0: f64) -> f64 {
    match rule {
        RuleType::DeGroot => step_degroot(theta, x).expect("dimension checked by caller"),
        RuleType::Fj => step_fj(theta, x, x_i0).expect("dimension checked by caller"),
        RuleType::Repell => step_repell(theta, x).expect("dimension checked by caller"),
        RuleType::Hk => step_hk(theta[0], row, x, i),
    }
}

/// Root-mean-square one-step error over validation pairs. Non-optimal
/// results map to infinity. Returned raw (unfloored) so that arm comparisons
/// can distinguish exact fits from merely tiny residuals; the bandit floors
/// the value at `err_floor` only where a logarithm is taken.
pub fn validation_error(
    result: &LearnResult,
    rule: RuleType,
    val_pairs: &[(Vec<f64>, f64)],
    i: usize,
    x_i0: f64,
) -> f64 {
    if !result.status.is_optimal() {
        return f64::INFINITY;
    }
    assert!(!val_pairs.is_empty());
    let sq_sum: f64 = val_pairs
        .iter()
        .map(|(x, target)| {
            let p = predict(rule, &result.theta, &result.row, x, i, x_i0);
            (p - target) * (p - target)
        })
        .sum();
    (sq_sum / val_pairs.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{sample_model, simulate, ModelGenConfig, RuleType};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn train_data(
        traj: &crate::dynamics::Trajectory,
        i: usize,
    ) -> (Vec<Vec<f64>>, Vec<f64>) {
        let t = traj.horizon();
        let x: Vec<Vec<f64>> = (0..t).map(|k| traj.state(k).to_vec()).collect();
        let b = traj.targets(i, 0, t);
        (x, b)
    }

    fn true_hints(model: &crate::dynamics::MixedModel, i: usize) -> NeighborHints {
        let n = model.graph.n();
        let neigh: Vec<usize> = (0..n).filter(|&j| model.graph.entry(i, j) != 0).collect();
        let non: Vec<usize> = (0..n).filter(|&j| model.graph.entry(i, j) == 0).collect();
        NeighborHints::new(neigh, non)
    }

    #[test]
    fn degroot_exact_recovery() {
        let n = 8;
        let gen = ModelGenConfig::experiment_default(n, [n, 0, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = sample_model(&gen, &mut rng).unwrap();
        let traj = simulate(&model, n + 2).unwrap();
        let cfg = LearnerConfig::default();
        for i in 0..n {
            let (x, b) = train_data(&traj, i);
            let res = learn_degroot(&x, &b, &true_hints(&model, i), &cfg);
            assert!(res.status.is_optimal());
            for j in 0..n {
                assert_abs_diff_eq!(res.theta[j], model.rules[i].theta[j], epsilon = 1e-6);
                let expected = if model.graph.entry(i, j) != 0 { 1 } else { 0 };
                assert_eq!(res.row[j], expected, "agent {i} entry {j}");
            }
        }
    }

    #[test]
    fn degroot_true_neighbor_in_non_set_is_infeasible() {
        let n = 8;
        let gen = ModelGenConfig::experiment_default(n, [n, 0, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = sample_model(&gen, &mut rng).unwrap();
        let traj = simulate(&model, n + 2).unwrap();
        let cfg = LearnerConfig::default();
        let i = 0;
        let neighbor = (0..n)
            .find(|&j| j != i && model.graph.entry(i, j) != 0)
            .expect("connected graph has a neighbor");
        let (x, b) = train_data(&traj, i);
        let hints = NeighborHints::new(vec![i], vec![neighbor]);
        let res = learn_degroot(&x, &b, &hints, &cfg);
        assert!(!res.status.is_optimal());
    }

    #[test]
    fn degroot_single_agent_self_loop() {
        let cfg = LearnerConfig::default();
        let x = vec![vec![0.7]];
        let b = vec![0.7];
        let res = learn_degroot(&x, &b, &NeighborHints::self_only(0), &cfg);
        assert!(res.status.is_optimal());
        assert_abs_diff_eq!(res.theta[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn fj_exact_recovery_and_mapping_identity() {
        let n = 8;
        let gen = ModelGenConfig::experiment_default(n, [0, n, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = sample_model(&gen, &mut rng).unwrap();
        let traj = simulate(&model, n + 3).unwrap();
        let cfg = LearnerConfig::default();
        for i in 0..n {
            let (x, b) = train_data(&traj, i);
            let res = learn_fj(&x, &b, model.x0[i], &true_hints(&model, i), &cfg);
            assert!(res.status.is_optimal());
            assert_abs_diff_eq!(res.theta[n], 0.5, epsilon = 1e-6);
            let w_sum: f64 = res.theta[..n].iter().sum();
            assert_abs_diff_eq!(w_sum, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn repell_exact_recovery() {
        // Random probe states rather than a trajectory: repelling dynamics
        // vary slowly, so trajectory rows lose numerical rank and the exact
        // interpolator stops being unique in double precision.
        let n = 8;
        let gen = ModelGenConfig::experiment_default(n, [0, 0, n, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let model = sample_model(&gen, &mut rng).unwrap();
        let cfg = LearnerConfig::default();
        let x: Vec<Vec<f64>> =
            (0..n + 2).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        for i in 0..n {
            let b: Vec<f64> = x
                .iter()
                .map(|row| crate::dynamics::step_repell(&model.rules[i].theta, row).unwrap())
                .collect();
            let res = learn_repell(&x, &b, &true_hints(&model, i), &cfg);
            assert!(res.status.is_optimal());
            for j in 0..n {
                assert_abs_diff_eq!(res.theta[j], model.rules[i].theta[j], epsilon = 1e-6);
                assert_eq!(res.row[j], model.graph.entry(i, j), "agent {i} entry {j}");
            }
        }
    }

    #[test]
    fn degroot_data_is_feasible_for_repell_learner() {
        let n = 6;
        let gen = ModelGenConfig::experiment_default(n, [n, 0, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = sample_model(&gen, &mut rng).unwrap();
        let traj = simulate(&model, n + 2).unwrap();
        let cfg = LearnerConfig::default();
        let (x, b) = train_data(&traj, 0);
        let hints = true_hints(&model, 0);
        assert!(learn_degroot(&x, &b, &hints, &cfg).status.is_optimal());
        assert!(learn_repell(&x, &b, &hints, &cfg).status.is_optimal());
    }

    #[test]
    fn hk_bound_bracket_and_exact_training_fit() {
        let n = 8;
        let gen = ModelGenConfig::experiment_default(n, [0, 0, 0, n]);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let model = sample_model(&gen, &mut rng).unwrap();
        let traj = simulate(&model, 6).unwrap();
        let cfg = LearnerConfig::default();
        for i in 0..n {
            let (x, b) = train_data(&traj, i);
            let res = learn_hk(&x, &b, i, &true_hints(&model, i), &cfg);
            let c_star = res.theta[0];
            assert!(0.25 <= c_star + cfg.eps_c, "agent {i}: c* = {c_star}");
            for (xt, &target) in x.iter().zip(&b) {
                let pred = predict(RuleType::Hk, &res.theta, &res.row, xt, i, 0.0);
                assert_eq!(pred, target, "agent {i} training target not reproduced");
            }
        }
    }

    #[test]
    fn hk_sentinel_paths() {
        let cfg = LearnerConfig::default();
        // Single neighbor {i}: every sample is fully explained by the self
        // prefix, so the sentinel clamps to twice the opinion range.
        let x = vec![vec![0.5, -0.3], vec![0.4, -0.2]];
        let b = vec![0.5, 0.4];
        let res = learn_hk(&x, &b, 0, &NeighborHints::self_only(0), &cfg);
        assert_abs_diff_eq!(res.theta[0], 1.0, epsilon = 1e-12); // 2 * 0.5
        // All neighbors always inside the bound behaves the same way.
        let x = vec![vec![0.2, 0.3], vec![0.25, 0.25]];
        let b = vec![0.25, 0.25];
        let res = learn_hk(&x, &b, 0, &NeighborHints::new(vec![0, 1], vec![]), &cfg);
        assert_abs_diff_eq!(res.theta[0], 0.6, epsilon = 1e-12);
    }

    #[test]
    fn degroot_ls_recovery_and_simplex_violation() {
        let n = 8;
        let gen = ModelGenConfig::experiment_default(n, [n, 0, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let model = sample_model(&gen, &mut rng).unwrap();
        let traj = simulate(&model, n + 2).unwrap();
        let cfg = LearnerConfig::default();
        let i = 1;
        let (x, b) = train_data(&traj, i);
        let res = learn_degroot_ls(&x, &b, &true_hints(&model, i), &cfg);
        assert!(res.status.is_optimal());
        for j in 0..n {
            assert_abs_diff_eq!(res.theta[j], model.rules[i].theta[j], epsilon = 1e-6);
        }
        // eps_w * n > 1 makes the simplex constraint unsatisfiable.
        let cfg_big = LearnerConfig { eps_w: 0.3, ..cfg };
        let hints = NeighborHints::new((0..n).collect(), vec![]);
        let res = learn_degroot_ls(&x, &b, &hints, &cfg_big);
        assert!(!res.status.is_optimal());
    }

    #[test]
    fn degroot_ls_single_sample_self_hint() {
        let cfg = LearnerConfig::default();
        // One sample, neigh = {0}, everyone else a non-neighbor: y = e_0.
        let x = vec![vec![0.4, 0.6]];
        let b = vec![0.4];
        let hints = NeighborHints::new(vec![0], vec![1]);
        let res = learn_degroot_ls(&x, &b, &hints, &cfg);
        assert!(res.status.is_optimal());
        assert_abs_diff_eq!(res.theta[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(res.theta[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fj_ls_recovery_and_lambda_clamp() {
        let n = 8;
        let gen = ModelGenConfig::experiment_default(n, [0, n, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let model = sample_model(&gen, &mut rng).unwrap();
        let traj = simulate(&model, n + 3).unwrap();
        let cfg = LearnerConfig::default();
        let i = 2;
        let (x, b) = train_data(&traj, i);
        let res = learn_fj_ls(&x, &b, model.x0[i], &true_hints(&model, i), &cfg);
        assert!(res.status.is_optimal());
        assert_abs_diff_eq!(res.theta[n], 0.5, epsilon = 1e-6);
        let w_sum: f64 = res.theta[..n].iter().sum();
        assert_abs_diff_eq!(w_sum, 1.0, epsilon = 1e-9);

        // Data from a nearly stubborn agent clamps lambda at the margin.
        let mut stubborn = model.clone();
        for r in &mut stubborn.rules {
            let last = r.theta.len() - 1;
            r.theta[last] = 0.01;
        }
        let traj2 = simulate(&stubborn, n + 3).unwrap();
        let (x2, b2) = train_data(&traj2, i);
        let res2 = learn_fj_ls(&x2, &b2, stubborn.x0[i], &true_hints(&stubborn, i), &cfg);
        assert!(res2.status.is_optimal());
        assert_abs_diff_eq!(res2.theta[n], cfg.eps_lambda, epsilon = 1e-7);
    }

    #[test]
    fn repell_ls_recovery_and_row_thresholding() {
        let n = 8;
        let gen = ModelGenConfig::experiment_default(n, [0, 0, n, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let model = sample_model(&gen, &mut rng).unwrap();
        let traj = simulate(&model, n + 2).unwrap();
        let cfg = LearnerConfig::default();
        let i = 3;
        let (x, b) = train_data(&traj, i);
        let res = learn_repell_ls(&x, &b, &true_hints(&model, i), &cfg);
        assert!(res.status.is_optimal());
        for j in 0..n {
            assert_abs_diff_eq!(res.theta[j], model.rules[i].theta[j], epsilon = 1e-6);
        }
        // Thresholded sign row on a hand vector.
        assert_eq!(sign_row(&[0.6, -0.4, 1e-12]), vec![1, -1, 0]);
        // non = everyone but the agent pins y = e_i.
        let hints = NeighborHints::new(vec![i], (0..n).filter(|&j| j != i).collect());
        let res = learn_repell_ls(&x, &b, &hints, &cfg);
        assert!(res.status.is_optimal());
        assert_abs_diff_eq!(res.theta[i], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn validation_error_cases() {
        let result = LearnResult {
            row: vec![1, 0],
            theta: vec![1.0, 0.0],
            status: SolveStatus::Optimal { kkt_residual: 0.0 },
            val_err: f64::NAN,
        };
        // Perfect model gives exactly zero (no floor at this layer).
        let pairs = vec![(vec![0.3, 0.1], 0.3), (vec![-0.2, 0.5], -0.2)];
        let err = validation_error(&result, RuleType::DeGroot, &pairs, 0, 0.0);
        assert_eq!(err, 0.0);
        // Constant misprediction by delta gives RMSE delta.
        let delta = 0.05;
        let pairs = vec![(vec![0.3, 0.1], 0.3 + delta), (vec![-0.2, 0.5], -0.2 + delta)];
        let err = validation_error(&result, RuleType::DeGroot, &pairs, 0, 0.0);
        assert_abs_diff_eq!(err, delta, epsilon = 1e-12);
        // Infeasible input maps to infinity.
        let failed = LearnResult::failed(2, 0, SolveStatus::Infeasible);
        assert_eq!(validation_error(&failed, RuleType::DeGroot, &pairs, 0, 0.0), f64::INFINITY);
    }

    #[test]
    fn predict_matches_steps() {
        let theta = [0.25, 0.75];
        let x = [0.2, -0.6];
        let row: [i8; 2] = [1, 1];
        assert_eq!(
            predict(RuleType::DeGroot, &theta, &row, &x, 0, 0.0),
            step_degroot(&theta, &x).unwrap()
        );
        assert_eq!(predict(RuleType::Fj, &[0.25, 0.75, 0.0], &row, &x, 0, 0.9), 0.9);
        // Large confidence bound averages all neighbors.
        assert_abs_diff_eq!(
            predict(RuleType::Hk, &[10.0], &row, &x, 0, 0.0),
            (0.2 - 0.6) / 2.0,
            epsilon = 1e-15
        );
    }
}
