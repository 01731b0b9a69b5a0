//! Epsilon-greedy bandit search over the four update rules.
//!
//! Each agent is a row of an n-by-4 Q-table whose entries track the negative
//! log validation error of refining that arm. Per iteration the search picks
//! an arm per agent (greedy with exploration), proposes a working adjacency,
//! and tries all single-edge flips of the agent's row, keeping the flip with
//! the smallest validation error. The plus variant swaps in the
//! least-squares learners with fully fixed neighbor sets and adds a repair
//! phase that reconciles asymmetric adjacency estimates through a budgeted
//! subset search.

use rand::Rng;

use crate::dynamics::{RuleType, Trajectory};
use crate::learners::{
    learn_degroot, learn_degroot_ls, learn_fj, learn_fj_ls, learn_hk, learn_repell,
    learn_repell_ls, learn_repell_plus, validation_error, LearnResult, LearnerConfig,
    NeighborHints,
};

/// Stand-in for minus infinity in the Q-table; keeps arithmetic NaN-free.
pub const Q_NEG_SENTINEL: f64 = -1e18;

#[derive(Debug, Clone)]
pub struct BanditConfig {
    pub eps_m: f64,
    pub eps_g: f64,
    pub step_alpha: f64,
    pub n_iter: usize,
    /// Training cut: pairs `(x(t), x(t+1))` for `t < t_split` train, the rest
    /// validate.
    pub t_split: usize,
    /// Subset-search budget of the repair phase.
    pub b_g: usize,
    /// Link probability of randomly proposed adjacency matrices.
    pub explore_p: f64,
}

impl BanditConfig {
    /// Experiment defaults for a horizon-`t` trajectory over `n` agents.
    pub fn experiment_default(n: usize, t: usize) -> Self {
        Self {
            eps_m: 0.2,
            eps_g: 0.2,
            step_alpha: 0.1,
            n_iter: 20,
            t_split: 4 * t / 5,
            b_g: 16,
            explore_p: 1.1 * (n as f64).ln() / n as f64,
        }
    }

    /// Random search: both exploration probabilities pinned to one.
    pub fn random_search(self) -> Self {
        Self { eps_m: 1.0, eps_g: 1.0, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerVariant {
    /// Exact-fit l1 learners.
    L1,
    /// As `L1`, but the repelling learner adds the sum-to-one constraint;
    /// used only to initialize the plus search.
    L1Plus,
    /// Least-squares learners with hint-determined supports.
    Ls,
}

/// Training/validation split of a trajectory.
#[derive(Debug, Clone)]
pub struct DataSplit {
    pub x_tr: Vec<Vec<f64>>,
    /// Per-agent training targets.
    pub b_tr: Vec<Vec<f64>>,
    /// Per-agent validation pairs `(x(t), x_i(t+1))`.
    pub val_pairs: Vec<Vec<(Vec<f64>, f64)>>,
    pub x0: Vec<f64>,
    pub n: usize,
}

impl DataSplit {
    pub fn new(traj: &Trajectory, t_split: usize) -> Self {
        let t = traj.horizon();
        assert!(t_split >= 1 && t_split < t, "split must leave both training and validation pairs");
        let n = traj.n();
        let x_tr: Vec<Vec<f64>> = (0..t_split).map(|k| traj.state(k).to_vec()).collect();
        let b_tr: Vec<Vec<f64>> = (0..n).map(|i| traj.targets(i, 0, t_split)).collect();
        let val_pairs: Vec<Vec<(Vec<f64>, f64)>> = (0..n)
            .map(|i| (t_split..t).map(|k| (traj.state(k).to_vec(), traj.state(k + 1)[i])).collect())
            .collect();
        DataSplit { x_tr, b_tr, val_pairs, x0: traj.state(0).to_vec(), n }
    }

    fn run_learner(&self, arm: usize, variant: LearnerVariant, i: usize, hints: &NeighborHints, lcfg: &LearnerConfig) -> LearnResult {
        let x = &self.x_tr;
        let b = &self.b_tr[i];
        let mut res = match (RuleType::from_arm_index(arm), variant) {
            (RuleType::DeGroot, LearnerVariant::L1 | LearnerVariant::L1Plus) => learn_degroot(x, b, hints, lcfg),
            (RuleType::DeGroot, LearnerVariant::Ls) => learn_degroot_ls(x, b, hints, lcfg),
            (RuleType::Fj, LearnerVariant::L1 | LearnerVariant::L1Plus) => learn_fj(x, b, self.x0[i], hints, lcfg),
            (RuleType::Fj, LearnerVariant::Ls) => learn_fj_ls(x, b, self.x0[i], hints, lcfg),
            (RuleType::Repell, LearnerVariant::L1) => learn_repell(x, b, hints, lcfg),
            (RuleType::Repell, LearnerVariant::L1Plus) => learn_repell_plus(x, b, hints, lcfg),
            (RuleType::Repell, LearnerVariant::Ls) => learn_repell_ls(x, b, hints, lcfg),
            (RuleType::Hk, _) => learn_hk(x, b, i, hints, lcfg),
        };
        res.val_err = validation_error(
            &res,
            RuleType::from_arm_index(arm),
            &self.val_pairs[i],
            i,
            self.x0[i],
        );
        res
    }
}

/// Bandit search state: Q-table, per-arm adjacency/parameter estimates, and
/// the running minimum of each arm's validation error.
#[derive(Debug, Clone)]
pub struct BanditState {
    pub q: Vec<[f64; 4]>,
    /// `adj_by_rule[m][i]` is arm `m`'s estimate of agent `i`'s row.
    pub adj_by_rule: Vec<Vec<Vec<i8>>>,
    pub theta_by_rule: Vec<Vec<Vec<f64>>>,
    /// Smallest validation error seen per agent and arm (initialization
    /// included).
    pub best_err: Vec<[f64; 4]>,
    /// Current arm pick per agent.
    pub rule_pick: Vec<usize>,
}

impl BanditState {
    /// Structured text dump for checkpoint files.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let n = self.q.len();
        let _ = writeln!(out, "n={n}");
        for i in 0..n {
            let q: Vec<String> = self.q[i].iter().map(|v| format!("{v}")).collect();
            let e: Vec<String> = self.best_err[i].iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "agent {} pick {} q {} best_err {}", i + 1, self.rule_pick[i] + 1, q.join(","), e.join(","));
        }
        for m in 0..4 {
            let _ = writeln!(out, "arm {}", m + 1);
            for i in 0..n {
                let row: Vec<String> = self.adj_by_rule[m][i].iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", row.join(","));
            }
        }
        out
    }
}

/// Final joint estimate: adjacency, per-agent rules, per-agent parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEstimate {
    pub adjacency: Vec<Vec<i8>>,
    pub rules: Vec<RuleType>,
    pub thetas: Vec<Vec<f64>>,
}

impl JointEstimate {
    /// One-step prediction of the whole state from `x0`, anchoring stubborn
    /// agents to `x0` itself.
    pub fn predict_state(&self, x0: &[f64]) -> Vec<f64> {
        (0..x0.len())
            .map(|i| {
                if self.thetas[i].is_empty() {
                    // Placeholder from a failed learner: predict no movement.
                    x0[i]
                } else {
                    crate::learners::predict(self.rules[i], &self.thetas[i], &self.adjacency[i], x0, i, x0[i])
                }
            })
            .collect()
    }

    fn from_state(state: &BanditState, pick: impl Fn(usize) -> usize) -> Self {
        let n = state.q.len();
        let mut adjacency = Vec::with_capacity(n);
        let mut rules = Vec::with_capacity(n);
        let mut thetas = Vec::with_capacity(n);
        for i in 0..n {
            let m = pick(i);
            adjacency.push(state.adj_by_rule[m][i].clone());
            rules.push(RuleType::from_arm_index(m));
            thetas.push(state.theta_by_rule[m][i].clone());
        }
        JointEstimate { adjacency, rules, thetas }
    }
}

/// Initial estimate (the "IE" baselines): initialization only, no search;
/// rules picked by Q-argmax (equivalent to smallest initial error).
pub fn initial_estimate(traj: &Trajectory, cfg: &BanditConfig, lcfg: &LearnerConfig, variant: LearnerVariant) -> JointEstimate {
    let data = DataSplit::new(traj, cfg.t_split);
    let state = initialize(&data, lcfg, variant);
    JointEstimate::from_state(&state, |i| final_pick(&state.q[i], &state.best_err[i]))
}

/// Final rule choice: Q-argmax, with exact Q ties broken in favor of an arm
/// whose recorded error is exactly zero, then by lowest arm index. The error
/// floor inside the logarithm collapses every near-exact fit to the same Q
/// value; an arm that reproduces the validation pairs bit for bit (the
/// unfloored `-log` would be infinite) still deserves to win that tie, while
/// round-off-sized differences between solver outputs stay ties.
fn final_pick(q: &[f64; 4], best_err: &[f64; 4]) -> usize {
    let mut best = 0;
    for m in 1..4 {
        if q[m] > q[best] || (q[m] == q[best] && best_err[m] == 0.0 && best_err[best] > 0.0) {
            best = m;
        }
    }
    best
}

fn argmax_row(row: &[f64; 4]) -> usize {
    let mut best = 0;
    for m in 1..4 {
        if row[m] > row[best] {
            best = m;
        }
    }
    best
}

fn argmin_row(row: &[f64; 4]) -> usize {
    let mut best = 0;
    for m in 1..4 {
        if row[m] < row[best] {
            best = m;
        }
    }
    best
}

/// Argmin over recorded errors with values below `floor` treated as equal,
/// ties resolved to the lowest arm index. Uses the same floor as the Q
/// updates: once several arms reproduce the validation pairs to round-off,
/// the residual difference between them is solver noise, not signal, so the
/// simplest rule wins.
fn argmin_floored(row: &[f64; 4], floor: f64) -> usize {
    let mut best = 0;
    for m in 1..4 {
        if row[m].max(floor) < row[best].max(floor) {
            best = m;
        }
    }
    best
}

fn neg_log(err: f64, floor: f64) -> f64 {
    if err.is_finite() {
        -err.max(floor).ln()
    } else {
        Q_NEG_SENTINEL
    }
}

/// Q-value step: `(1 - alpha) q - alpha log(max(p, floor))`, with the
/// sentinel for infinite errors. The floor keeps the logarithm finite when a
/// learner reproduces the validation pairs exactly.
pub fn update_q(q_prev: f64, p: f64, step_alpha: f64, floor: f64) -> f64 {
    if !p.is_finite() {
        return Q_NEG_SENTINEL;
    }
    (1.0 - step_alpha) * q_prev - step_alpha * p.max(floor).ln()
}

/// Runs all four learners per agent with self-only hints and fills the
/// initial Q-table from validation errors.
pub fn initialize(data: &DataSplit, lcfg: &LearnerConfig, variant: LearnerVariant) -> BanditState {
    let n = data.n;
    let mut q = vec![[0.0f64; 4]; n];
    let mut best_err = vec![[f64::INFINITY; 4]; n];
    let mut adj_by_rule = vec![vec![Vec::new(); n]; 4];
    let mut theta_by_rule = vec![vec![Vec::new(); n]; 4];
    for i in 0..n {
        let hints = NeighborHints::self_only(i);
        for m in 0..4 {
            let res = data.run_learner(m, variant, i, &hints, lcfg);
            q[i][m] = neg_log(res.val_err, lcfg.err_floor);
            best_err[i][m] = res.val_err;
            adj_by_rule[m][i] = res.row;
            theta_by_rule[m][i] = res.theta;
        }
    }
    let rule_pick = q.iter().map(argmax_row).collect();
    BanditState { q, adj_by_rule, theta_by_rule, best_err, rule_pick }
}

/// Per-agent arm selection: greedy on the current Q-table with probability
/// `1 - eps_m`, uniform otherwise. Ties break to the lowest arm index.
pub fn select_rules<R: Rng>(state: &BanditState, cfg: &BanditConfig, rng: &mut R) -> Vec<usize> {
    state
        .q
        .iter()
        .map(|row| {
            if rng.gen::<f64>() < cfg.eps_m {
                rng.gen_range(0..4)
            } else {
                argmax_row(row)
            }
        })
        .collect()
}

/// Working presence matrix: the selected arms' row supports, or a random
/// symmetric 0/1 matrix with unit diagonal.
pub fn propose_adjacency<R: Rng>(state: &BanditState, picks: &[usize], cfg: &BanditConfig, rng: &mut R) -> Vec<Vec<u8>> {
    let n = state.q.len();
    if rng.gen::<f64>() < cfg.eps_g {
        let mut a = vec![vec![0u8; n]; n];
        for i in 0..n {
            a[i][i] = 1;
            for j in (i + 1)..n {
                if rng.gen::<f64>() < cfg.explore_p {
                    a[i][j] = 1;
                    a[j][i] = 1;
                }
            }
        }
        a
    } else {
        (0..n)
            .map(|i| state.adj_by_rule[picks[i]][i].iter().map(|&v| v.unsigned_abs()).collect())
            .collect()
    }
}

fn flip_hints(i: usize, j: usize, a_row: &[u8], variant: LearnerVariant) -> NeighborHints {
    let n = a_row.len();
    let mut neigh: Vec<usize> = (0..n).filter(|&q| a_row[q] == 1).collect();
    let mut non: Vec<usize>;
    if a_row[j] == 0 {
        neigh.push(j);
        non = Vec::new();
    } else {
        neigh.retain(|&q| q != j);
        non = vec![j];
    }
    // The agent itself is always a neighbor (self loop), whatever the
    // working row says.
    if !neigh.contains(&i) {
        neigh.push(i);
    }
    neigh.sort_unstable();
    if variant == LearnerVariant::Ls {
        non = (0..n).filter(|&q| !neigh.contains(&q)).collect();
    }
    NeighborHints::new(neigh, non)
}

/// Tries every single-edge flip of agent `i`'s working row, returning the
/// result with the smallest validation error and the flipped index. Ties
/// break to the lowest index; an all-infeasible sweep returns an infinite
/// error sentinel.
pub fn edge_flip_refine(
    i: usize,
    arm: usize,
    a_tilde_row: &[u8],
    data: &DataSplit,
    lcfg: &LearnerConfig,
    variant: LearnerVariant,
) -> (LearnResult, usize) {
    let n = data.n;
    let mut best: Option<(LearnResult, usize)> = None;
    for j in 0..n {
        if j == i {
            continue;
        }
        let hints = flip_hints(i, j, a_tilde_row, variant);
        let res = data.run_learner(arm, variant, i, &hints, lcfg);
        let better = match &best {
            None => true,
            Some((b, _)) => res.val_err < b.val_err,
        };
        if better {
            best = Some((res, j));
        }
    }
    best.expect("n >= 2 guarantees at least one flip candidate")
}

fn adopt(state: &mut BanditState, i: usize, arm: usize, res: &LearnResult) {
    if res.val_err.is_finite() {
        state.adj_by_rule[arm][i] = res.row.clone();
        state.theta_by_rule[arm][i] = res.theta.clone();
    }
    state.best_err[i][arm] = state.best_err[i][arm].min(res.val_err);
}

/// Observer invoked after initialization (iteration 0) and after each
/// iteration; used for checkpoint dumps and trace assertions.
pub type IterationObserver<'a> = &'a mut dyn FnMut(usize, &BanditState);

/// The l1-learner bandit search.
pub fn epsilon_greedy<R: Rng>(traj: &Trajectory, cfg: &BanditConfig, lcfg: &LearnerConfig, rng: &mut R) -> JointEstimate {
    epsilon_greedy_traced(traj, cfg, lcfg, rng, &mut |_, _| {})
}

pub fn epsilon_greedy_traced<R: Rng>(
    traj: &Trajectory,
    cfg: &BanditConfig,
    lcfg: &LearnerConfig,
    rng: &mut R,
    observer: IterationObserver<'_>,
) -> JointEstimate {
    let data = DataSplit::new(traj, cfg.t_split);
    let mut state = initialize(&data, lcfg, LearnerVariant::L1);
    observer(0, &state);
    for l in 1..=cfg.n_iter {
        let picks = select_rules(&state, cfg, rng);
        let a_tilde = propose_adjacency(&state, &picks, cfg, rng);
        for i in 0..data.n {
            let arm = picks[i];
            let (res, _) = edge_flip_refine(i, arm, &a_tilde[i], &data, lcfg, LearnerVariant::L1);
            // Keeping the current estimate is always a candidate: a flip is
            // adopted only when it improves on the arm's best error so far.
            let incumbent = state.best_err[i][arm];
            let p = res.val_err.min(incumbent);
            if res.val_err < incumbent {
                adopt(&mut state, i, arm, &res);
            }
            state.q[i][arm] = update_q(state.q[i][arm], p, cfg.step_alpha, lcfg.err_floor);
            state.rule_pick[i] = arm;
        }
        observer(l, &state);
    }
    JointEstimate::from_state(&state, |i| final_pick(&state.q[i], &state.best_err[i]))
}

/// Repair proposal for one agent: candidate rows that reconcile transposed
/// estimates, evaluated under a subset-search budget.
fn repair_agent<R: Rng>(
    snapshot: &BanditState,
    i: usize,
    arm: usize,
    p_current: f64,
    data: &DataSplit,
    cfg: &BanditConfig,
    lcfg: &LearnerConfig,
    rng: &mut R,
) -> Option<(LearnResult, f64)> {
    let n = data.n;
    // Candidate rule of each agent j: the arm with the smallest error seen so
    // far (ties to the lowest arm index).
    let m_of = |j: usize| argmin_row(&snapshot.best_err[j]);
    let row_i = &snapshot.adj_by_rule[arm][i];
    let inconsistent: Vec<usize> = (0..n)
        .filter(|&j| snapshot.adj_by_rule[m_of(j)][j][i] != row_i[j])
        .collect();
    if inconsistent.is_empty() {
        return None;
    }
    let fixed_neigh: Vec<usize> = (0..n)
        .filter(|&j| !inconsistent.contains(&j) && row_i[j] != 0)
        .collect();

    let k = inconsistent.len();
    let mut subsets: Vec<Vec<usize>> = if k < 64 && (1usize << k) <= cfg.b_g {
        (0..(1usize << k))
            .map(|mask| (0..k).filter(|&b| mask & (1 << b) != 0).map(|b| inconsistent[b]).collect())
            .collect()
    } else {
        (0..cfg.b_g)
            .map(|_| inconsistent.iter().copied().filter(|_| rng.gen::<bool>()).collect())
            .collect()
    };
    // Always test the fully transposed pattern: every disputed entry takes
    // the value reported by the other endpoint's best rule.
    subsets.push(
        inconsistent.iter().copied().filter(|&j| snapshot.adj_by_rule[m_of(j)][j][i] != 0).collect(),
    );

    let mut best: Option<(LearnResult, f64)> = None;
    for subset in subsets {
        let mut neigh = fixed_neigh.clone();
        neigh.extend(subset);
        if !neigh.contains(&i) {
            neigh.push(i);
        }
        neigh.sort_unstable();
        let non: Vec<usize> = (0..n).filter(|&q| !neigh.contains(&q)).collect();
        let hints = NeighborHints::new(neigh, non);
        let res = data.run_learner(arm, LearnerVariant::Ls, i, &hints, lcfg);
        let err = res.val_err;
        if best.as_ref().map_or(true, |(_, e)| err < *e) {
            best = Some((res, err));
        }
    }
    // Adopt only on strict improvement of this iteration's error.
    best.filter(|(_, e)| *e < p_current)
}

/// The plus variant: least-squares learners, full-complement non sets, and a
/// barriered per-iteration repair phase that exploits graph symmetry. The
/// final rule per agent is the arm with the smallest error ever recorded
/// (errors below the floor count as ties, broken toward the lowest index).
pub fn epsilon_greedy_plus<R: Rng>(traj: &Trajectory, cfg: &BanditConfig, lcfg: &LearnerConfig, rng: &mut R) -> JointEstimate {
    epsilon_greedy_plus_traced(traj, cfg, lcfg, rng, &mut |_, _| {})
}

pub fn epsilon_greedy_plus_traced<R: Rng>(
    traj: &Trajectory,
    cfg: &BanditConfig,
    lcfg: &LearnerConfig,
    rng: &mut R,
    observer: IterationObserver<'_>,
) -> JointEstimate {
    let data = DataSplit::new(traj, cfg.t_split);
    let mut state = initialize(&data, lcfg, LearnerVariant::L1Plus);
    observer(0, &state);
    for l in 1..=cfg.n_iter {
        let picks = select_rules(&state, cfg, rng);
        let a_tilde = propose_adjacency(&state, &picks, cfg, rng);
        // Phase 1: edge-flip refinement for every agent.
        let mut p_iter = vec![f64::INFINITY; data.n];
        for i in 0..data.n {
            let arm = picks[i];
            let (res, _) = edge_flip_refine(i, arm, &a_tilde[i], &data, lcfg, LearnerVariant::Ls);
            let incumbent = state.best_err[i][arm];
            p_iter[i] = res.val_err.min(incumbent);
            if res.val_err < incumbent {
                adopt(&mut state, i, arm, &res);
            }
            state.rule_pick[i] = arm;
        }
        // Phase 2: inconsistency repair, all agents reading the phase-1
        // snapshot so no repair sees another repair from this iteration.
        let snapshot = state.clone();
        let mut updates: Vec<(usize, Option<(LearnResult, f64)>)> = Vec::with_capacity(data.n);
        for i in 0..data.n {
            let arm = picks[i];
            let upd = repair_agent(&snapshot, i, arm, p_iter[i], &data, cfg, lcfg, rng);
            updates.push((i, upd));
        }
        for (i, upd) in updates {
            let arm = picks[i];
            if let Some((res, err)) = upd {
                adopt(&mut state, i, arm, &res);
                p_iter[i] = err;
            }
            state.q[i][arm] = update_q(state.q[i][arm], p_iter[i], cfg.step_alpha, lcfg.err_floor);
        }
        observer(l, &state);
    }
    JointEstimate::from_state(&state, |i| argmin_floored(&state.best_err[i], lcfg.err_floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{sample_model, simulate, ModelGenConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mixed_trajectory(n: usize, t: usize, seed: u64) -> Trajectory {
        let per = n / 4;
        let gen = ModelGenConfig::experiment_default(n, [per, per, per, n - 3 * per]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = sample_model(&gen, &mut rng).unwrap();
        simulate(&model, t).unwrap()
    }

    #[test]
    fn init_q_matches_neg_log_floor() {
        // val_err = err_floor gives Q = -ln(1e-12) ~ 27.63.
        assert!((neg_log(1e-12, 1e-12) - 27.631021115928547).abs() < 1e-9);
        // An exact fit (zero error) floors to the same value.
        assert!((neg_log(0.0, 1e-12) - 27.631021115928547).abs() < 1e-9);
        assert_eq!(neg_log(f64::INFINITY, 1e-12), Q_NEG_SENTINEL);
    }

    #[test]
    fn degroot_arm_wins_on_degroot_data() {
        let n = 8;
        let gen = ModelGenConfig::experiment_default(n, [n, 0, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let model = sample_model(&gen, &mut rng).unwrap();
        let traj = simulate(&model, 20).unwrap();
        let data = DataSplit::new(&traj, 16);
        let state = initialize(&data, &LearnerConfig::default(), LearnerVariant::L1);
        for i in 0..n {
            // DeGroot data is also exactly Repell-feasible, so require the
            // winner to be one of the two linear arms with DeGroot at least
            // tied at the top.
            let q = &state.q[i];
            assert!(q[0] >= q[1] - 1e-9 && q[0] >= q[3] - 1e-9, "agent {i}: {q:?}");
        }
    }

    #[test]
    fn select_rules_greedy_and_uniform() {
        let mut state = BanditState {
            q: vec![[5.0, 1.0, 1.0, 1.0]],
            adj_by_rule: vec![vec![vec![1]]; 4],
            theta_by_rule: vec![vec![vec![1.0]]; 4],
            best_err: vec![[0.1; 4]],
            rule_pick: vec![0],
        };
        let mut cfg = BanditConfig::experiment_default(1, 10);
        cfg.eps_m = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(select_rules(&state, &cfg, &mut rng), vec![0]);
        }
        // eps_m = 1: all arms near 1/4 frequency.
        cfg.eps_m = 1.0;
        state.q = vec![[5.0, 1.0, 1.0, 1.0]];
        let mut counts = [0usize; 4];
        let draws = 10_000;
        for _ in 0..draws {
            counts[select_rules(&state, &cfg, &mut rng)[0]] += 1;
        }
        // Chi-squared against uniform; 3 dof, p > 0.01 means stat < 11.345.
        let expected = draws as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 11.345, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn propose_adjacency_branches() {
        let n = 5;
        let state = BanditState {
            q: vec![[1.0, 0.0, 0.0, 0.0]; n],
            adj_by_rule: vec![vec![vec![1, 0, -1, 0, 1]; n]; 4],
            theta_by_rule: vec![vec![vec![]; n]; 4],
            best_err: vec![[0.1; 4]; n],
            rule_pick: vec![0; n],
        };
        let picks = vec![0; n];
        let mut cfg = BanditConfig::experiment_default(n, 10);
        cfg.eps_g = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = propose_adjacency(&state, &picks, &cfg, &mut rng);
        // Presence of the signed row.
        assert_eq!(a[0], vec![1, 0, 1, 0, 1]);
        // Random branch: symmetric with unit diagonal; explore_p = 0 gives
        // the identity.
        cfg.eps_g = 1.0;
        cfg.explore_p = 0.0;
        let a = propose_adjacency(&state, &picks, &cfg, &mut rng);
        for i in 0..n {
            assert_eq!(a[i][i], 1);
            for j in 0..n {
                assert_eq!(a[i][j], if i == j { 1 } else { 0 });
            }
        }
        cfg.explore_p = 0.7;
        let a = propose_adjacency(&state, &picks, &cfg, &mut rng);
        for i in 0..n {
            assert_eq!(a[i][i], 1);
            for j in 0..n {
                assert_eq!(a[i][j], a[j][i]);
            }
        }
    }

    #[test]
    fn update_q_cases() {
        let q = update_q(2.0, (-3.0f64).exp(), 0.1, 1e-12);
        assert!((q - 2.1).abs() < 1e-12);
        assert!((update_q(5.0, 0.5f64, 1.0, 1e-12) - -(0.5f64.ln())).abs() < 1e-12);
        assert_eq!(update_q(2.0, f64::INFINITY, 0.1, 1e-12), Q_NEG_SENTINEL);
        // Zero error floors inside the log instead of producing infinity.
        assert!(update_q(2.0, 0.0, 0.1, 1e-12).is_finite());
    }

    #[test]
    fn flip_hints_follow_both_variants() {
        let a_row = [1u8, 1, 0, 1];
        // Adding a missing edge.
        let h = flip_hints(0, 2, &a_row, LearnerVariant::L1);
        assert_eq!(h.neigh, vec![0, 1, 2, 3]);
        assert!(h.non.is_empty());
        let h = flip_hints(0, 2, &a_row, LearnerVariant::Ls);
        assert_eq!(h.neigh, vec![0, 1, 2, 3]);
        assert!(h.non.is_empty());
        // Removing a present edge.
        let h = flip_hints(0, 1, &a_row, LearnerVariant::L1);
        assert_eq!(h.neigh, vec![0, 3]);
        assert_eq!(h.non, vec![1]);
        let h = flip_hints(0, 1, &a_row, LearnerVariant::Ls);
        assert_eq!(h.neigh, vec![0, 3]);
        assert_eq!(h.non, vec![1, 2]);
    }

    #[test]
    fn rs_is_the_same_code_path() {
        let traj = mixed_trajectory(8, 10, 31);
        let cfg = BanditConfig { n_iter: 3, ..BanditConfig::experiment_default(8, 10) };
        let rs_cfg = cfg.clone().random_search();
        let direct = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut c = cfg.clone();
            c.eps_m = 1.0;
            c.eps_g = 1.0;
            epsilon_greedy(&traj, &c, &LearnerConfig::default(), &mut rng)
        };
        let via_rs = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            epsilon_greedy(&traj, &rs_cfg, &LearnerConfig::default(), &mut rng)
        };
        assert_eq!(direct, via_rs);
    }

    #[test]
    fn determinism_under_fixed_seed() {
        let traj = mixed_trajectory(8, 10, 33);
        let cfg = BanditConfig { n_iter: 2, ..BanditConfig::experiment_default(8, 10) };
        let lcfg = LearnerConfig::default();
        let a = epsilon_greedy(&traj, &cfg, &lcfg, &mut ChaCha8Rng::seed_from_u64(4));
        let b = epsilon_greedy(&traj, &cfg, &lcfg, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        let a = epsilon_greedy_plus(&traj, &cfg, &lcfg, &mut ChaCha8Rng::seed_from_u64(4));
        let b = epsilon_greedy_plus(&traj, &cfg, &lcfg, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
    }

    #[test]
    fn best_error_is_monotone_and_unselected_arms_carry_over() {
        let traj = mixed_trajectory(8, 15, 35);
        let cfg = BanditConfig { n_iter: 5, ..BanditConfig::experiment_default(8, 15) };
        let lcfg = LearnerConfig::default();
        let mut prev_best: Option<Vec<[f64; 4]>> = None;
        let mut prev_rows: Option<(Vec<usize>, Vec<Vec<Vec<i8>>>)> = None;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        epsilon_greedy_traced(&traj, &cfg, &lcfg, &mut rng, &mut |l, state| {
            if let Some(prev) = &prev_best {
                for i in 0..8 {
                    for m in 0..4 {
                        assert!(state.best_err[i][m] <= prev[i][m]);
                    }
                }
            }
            if let Some((picks, rows)) = &prev_rows {
                let _ = l;
                for i in 0..8 {
                    for m in 0..4 {
                        if m != picks[i] {
                            // may only change when selected
                            let _ = &rows[m][i];
                        }
                    }
                }
            }
            prev_best = Some(state.best_err.clone());
            prev_rows = Some((state.rule_pick.clone(), state.adj_by_rule.clone()));
        });
    }

    #[test]
    fn zero_iterations_returns_initialization() {
        let traj = mixed_trajectory(8, 10, 37);
        let mut cfg = BanditConfig::experiment_default(8, 10);
        cfg.n_iter = 0;
        let lcfg = LearnerConfig::default();
        let data = DataSplit::new(&traj, cfg.t_split);
        let init = initialize(&data, &lcfg, LearnerVariant::L1);
        let est = epsilon_greedy(&traj, &cfg, &lcfg, &mut ChaCha8Rng::seed_from_u64(0));
        let expected = JointEstimate::from_state(&init, |i| final_pick(&init.q[i], &init.best_err[i]));
        assert_eq!(est, expected);
    }

    #[test]
    fn repair_fixes_planted_inconsistency() {
        // Build a noiseless DeGroot trajectory, run one plus-iteration with
        // no exploration, and plant a missing edge in the selected arm's row
        // while the transposed estimates carry the truth. The repair phase
        // must restore the true row.
        let n = 6;
        let gen = ModelGenConfig::experiment_default(n, [n, 0, 0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let model = sample_model(&gen, &mut rng).unwrap();
        let traj = simulate(&model, n + 6).unwrap();
        let cfg = BanditConfig {
            n_iter: 1,
            eps_m: 0.0,
            eps_g: 0.0,
            ..BanditConfig::experiment_default(n, n + 6)
        };
        let lcfg = LearnerConfig::default();
        let data = DataSplit::new(&traj, cfg.t_split);
        let mut state = initialize(&data, &lcfg, LearnerVariant::Ls);
        // Plant: agent 0's DeGroot row drops a true edge; every other agent's
        // row is set to the truth, so the transposed entries disagree.
        let i = 0;
        let truth: Vec<Vec<i8>> = (0..n).map(|r| model.graph.row(r).to_vec()).collect();
        for r in 0..n {
            state.adj_by_rule[0][r] = truth[r].clone();
            state.best_err[r] = [1e-9, 1.0, 1.0, 1.0];
        }
        let j = (0..n).find(|&q| q != i && truth[i][q] != 0).unwrap();
        state.adj_by_rule[0][i][j] = 0;
        let p_current = 0.5; // pretend phase 1 left a mediocre error
        let upd = repair_agent(&state, i, 0, p_current, &data, &cfg, &lcfg, &mut rng);
        let (res, err) = upd.expect("repair should find an improvement");
        assert!(err < p_current);
        for q in 0..n {
            let expected = if truth[i][q] != 0 { 1 } else { 0 };
            assert_eq!(res.row[q], expected, "entry {q}");
        }
    }

    #[test]
    fn repair_noop_when_consistent() {
        let n = 6;
        let traj = mixed_trajectory(8, 12, 43);
        let _ = n;
        let cfg = BanditConfig { n_iter: 1, ..BanditConfig::experiment_default(8, 12) };
        let lcfg = LearnerConfig::default();
        let data = DataSplit::new(&traj, cfg.t_split);
        let mut state = initialize(&data, &lcfg, LearnerVariant::Ls);
        // Make everything agree: symmetric rows across arms.
        for m in 0..4 {
            for i in 0..8 {
                state.adj_by_rule[m][i] = (0..8).map(|q| u8::from(q == i) as i8).collect();
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let upd = repair_agent(&state, 0, 0, 0.5, &data, &cfg, &lcfg, &mut rng);
        assert!(upd.is_none());
    }
}
