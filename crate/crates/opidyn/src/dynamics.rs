//! Mixed opinion dynamics: per-rule step functions, simulation, assumption
//! checks, and random model sampling.
//!
//! Four update rules share one signed undirected graph. DeGroot agents take a
//! weighted average of positive neighbors; Friedkin-Johnsen (FJ) agents blend
//! that average with their initial opinion through a susceptibility; repelling
//! agents are pushed away by negative neighbors; social Hegselmann-Krause (HK)
//! agents average only neighbors within a confidence bound of themselves.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::graph::{generate_mixed_graph, GraphError, GraphGenConfig, SignedGraph};

/// Update-rule tag; the integer labels match the bandit's arm look-up table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleType {
    DeGroot = 1,
    Fj = 2,
    Repell = 3,
    Hk = 4,
}

impl RuleType {
    pub const ALL: [RuleType; 4] = [RuleType::DeGroot, RuleType::Fj, RuleType::Repell, RuleType::Hk];

    pub fn arm_index(self) -> usize {
        self as usize - 1
    }

    pub fn from_arm_index(m: usize) -> Self {
        Self::ALL[m]
    }
}

impl fmt::Display for RuleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleType::DeGroot => "DeGroot",
            RuleType::Fj => "FJ",
            RuleType::Repell => "Repell",
            RuleType::Hk => "HK",
        };
        f.write_str(s)
    }
}

/// One agent's rule and parameter vector.
///
/// DeGroot: `theta` is a stochastic weight vector over all agents. FJ:
/// `theta` is `[w_1..w_n, lambda]`. Repell: `theta` is a signed weight vector
/// summing to one. HK: `theta` is the scalar confidence bound.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentRule {
    pub rule: RuleType,
    pub theta: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model violates assumptions: {0:?}")]
    InvalidModel(Vec<AssumptionViolation>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A mixed model: graph, per-agent rules, and the initial state.
#[derive(Debug, Clone)]
pub struct MixedModel {
    pub graph: SignedGraph,
    pub rules: Vec<AgentRule>,
    pub x0: Vec<f64>,
}

/// A simulated state trajectory; row `t` is `x(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(states: Vec<Vec<f64>>) -> Self {
        assert!(states.len() >= 2, "a trajectory needs at least two rows");
        let n = states[0].len();
        assert!(states.iter().all(|r| r.len() == n));
        Self { states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n(&self) -> usize {
        self.states[0].len()
    }

    /// Final time step T (number of transitions).
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.states[t]
    }

    /// Keeps rows `0..=t_max`.
    pub fn truncated(&self, t_max: usize) -> Trajectory {
        assert!(t_max >= 1 && t_max <= self.horizon());
        Trajectory { states: self.states[..=t_max].to_vec() }
    }

    /// Data matrix rows `x(t0)..x(t1-1)` (one row per sample).
    pub fn design_rows(&self, t0: usize, t1: usize) -> Vec<&[f64]> {
        (t0..t1).map(|t| self.state(t).as_ref()).collect()
    }

    /// Targets `x_i(t0+1)..x_i(t1)`.
    pub fn targets(&self, i: usize, t0: usize, t1: usize) -> Vec<f64> {
        (t0..t1).map(|t| self.states[t + 1][i]).collect()
    }

    /// CSV with one row per time step, full double precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.n()).map(|i| format!("x{}", i + 1)).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.states {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// DeGroot step: the weighted average `sum_j theta_j x_j`.
pub fn step_degroot(theta: &[f64], x: &[f64]) -> Result<f64, DynamicsError> {
    if theta.len() != x.len() {
        return Err(DynamicsError::DimensionMismatch { expected: theta.len(), got: x.len() });
    }
    Ok(theta.iter().zip(x).map(|(w, v)| w * v).sum())
}

/// FJ step: `lambda * (w . x) + (1 - lambda) * x_i(0)` with `theta = [w, lambda]`.
pub fn step_fj(theta: &[f64], x: &[f64], x_i0: f64) -> Result<f64, DynamicsError> {
    if theta.len() != x.len() + 1 {
        return Err(DynamicsError::DimensionMismatch { expected: x.len() + 1, got: theta.len() });
    }
    let lambda = theta[x.len()];
    let avg = step_degroot(&theta[..x.len()], x)?;
    Ok(lambda * avg + (1.0 - lambda) * x_i0)
}

/// Repelling step: the signed weights already encode the positive/negative
/// influence strengths, so this is a plain inner product.
pub fn step_repell(theta: &[f64], x: &[f64]) -> Result<f64, DynamicsError> {
    step_degroot(theta, x)
}

/// Social HK step: average of the neighbors within confidence bound `c` of
/// `x_i`, the tie `|x_j - x_i| = c` included. The trust set always contains
/// `i` itself. Summation runs in agent-index order.
pub fn step_hk(c: f64, neighbor_row: &[i8], x: &[f64], i: usize) -> f64 {
    debug_assert!(neighbor_row[i] != 0, "agent must have a self loop");
    let xi = x[i];
    let mut sum = 0.0;
    let mut count = 0usize;
    for (j, (&a, &xj)) in neighbor_row.iter().zip(x).enumerate() {
        if (a != 0 || j == i) && (xj - xi).abs() <= c {
            sum += xj;
            count += 1;
        }
    }
    sum / count as f64
}

/// One violated clause of the model's well-posedness assumptions.
#[derive(Debug, Clone, PartialEq)]
pub enum AssumptionViolation {
    /// (i) support graph disconnected.
    Disconnected,
    /// (ii) FJ susceptibility outside `[eps_lambda, 1 - eps_lambda]`.
    FjSusceptibility { agent: usize, lambda: f64 },
    /// (iii) negative neighbors present iff the rule is Repell.
    NegativeEdgeRuleMismatch { agent: usize },
    /// (iv) HK confidence bound at or above the initial opinion range.
    HkBoundTooLarge { agent: usize, c: f64 },
}

/// Checks clauses (i)-(iv); violations are reported, not raised.
pub fn validate_assumptions(model: &MixedModel, eps_lambda: f64) -> Vec<AssumptionViolation> {
    let mut out = Vec::new();
    if !model.graph.is_connected() {
        out.push(AssumptionViolation::Disconnected);
    }
    let x0_max = model.x0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, rule) in model.rules.iter().enumerate() {
        let (_, d_minus) = model.graph.degrees(i).expect("agent in range");
        let has_neg = d_minus > 0;
        if has_neg != (rule.rule == RuleType::Repell) {
            out.push(AssumptionViolation::NegativeEdgeRuleMismatch { agent: i });
        }
        match rule.rule {
            RuleType::Fj => {
                let lambda = *rule.theta.last().expect("FJ theta nonempty");
                if !(eps_lambda..=1.0 - eps_lambda).contains(&lambda) {
                    out.push(AssumptionViolation::FjSusceptibility { agent: i, lambda });
                }
            }
            RuleType::Hk => {
                let c = rule.theta[0];
                if c >= x0_max {
                    out.push(AssumptionViolation::HkBoundTooLarge { agent: i, c });
                }
            }
            _ => {}
        }
    }
    out
}

/// One synchronous update of all agents. FJ agents reference `x0`.
pub fn step_model(model: &MixedModel, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    let n = model.graph.n();
    let mut next = vec![0.0; n];
    for i in 0..n {
        let rule = &model.rules[i];
        next[i] = match rule.rule {
            RuleType::DeGroot => step_degroot(&rule.theta, x)?,
            RuleType::Fj => step_fj(&rule.theta, x, model.x0[i])?,
            RuleType::Repell => step_repell(&rule.theta, x)?,
            RuleType::Hk => step_hk(rule.theta[0], model.graph.row(i), x, i),
        };
    }
    Ok(next)
}

/// Simulates `T` synchronous steps from the model's initial state.
pub fn simulate(model: &MixedModel, t_horizon: usize) -> Result<Trajectory, DynamicsError> {
    assert!(t_horizon >= 1, "horizon must be at least 1");
    let violations = validate_assumptions(model, 0.0);
    if !violations.is_empty() {
        return Err(DynamicsError::InvalidModel(violations));
    }
    let mut states = Vec::with_capacity(t_horizon + 1);
    states.push(model.x0.clone());
    for t in 0..t_horizon {
        let next = step_model(model, &states[t])?;
        states.push(next);
    }
    Ok(Trajectory::new(states))
}

/// Configuration for random mixed-model sampling.
#[derive(Debug, Clone)]
pub struct ModelGenConfig {
    /// Agents per rule in arm order (DeGroot, FJ, Repell, HK).
    pub counts: [usize; 4],
    pub graph: GraphGenConfig,
    /// Repelling influence strengths are `strength / d_i` for both signs.
    pub repell_strength: f64,
    pub lambda: f64,
    pub confidence: f64,
}

impl ModelGenConfig {
    /// The experiment defaults: 5 agents per rule at n=20, strengths 0.2/d_i,
    /// susceptibility 0.5, confidence bound 0.25.
    pub fn experiment_default(n: usize, counts: [usize; 4]) -> Self {
        assert_eq!(counts.iter().sum::<usize>(), n);
        let repell_start = counts[0] + counts[1];
        let repell_agents: Vec<usize> = (repell_start..repell_start + counts[2]).collect();
        Self {
            counts,
            graph: GraphGenConfig::er_default(n, repell_agents),
            repell_strength: 0.2,
            lambda: 0.5,
            confidence: 0.25,
        }
    }

    /// Rule of agent `i` under the block assignment.
    pub fn rule_of(&self, i: usize) -> RuleType {
        let mut acc = 0;
        for (m, &c) in self.counts.iter().enumerate() {
            acc += c;
            if i < acc {
                return RuleType::from_arm_index(m);
            }
        }
        unreachable!("agent index out of range")
    }
}

/// Samples a full mixed model: graph, per-agent parameters, and an initial
/// state drawn iid Uniform(-1,1). DeGroot/FJ weights are uniform over positive
/// neighbors; repelling weights follow the alpha/beta construction.
pub fn sample_model<R: Rng>(gen: &ModelGenConfig, rng: &mut R) -> Result<MixedModel, DynamicsError> {
    let n = gen.graph.n;
    let graph = generate_mixed_graph(&gen.graph, rng)?;
    let mut rules = Vec::with_capacity(n);
    for i in 0..n {
        let rule = gen.rule_of(i);
        let (d_plus, d_minus) = graph.degrees(i)?;
        let d_total = d_plus + d_minus;
        let theta = match rule {
            RuleType::DeGroot | RuleType::Fj => {
                let mut w = vec![0.0; n];
                for j in graph.pos_neighbors(i) {
                    w[j] = 1.0 / d_plus as f64;
                }
                if rule == RuleType::Fj {
                    w.push(gen.lambda);
                }
                w
            }
            RuleType::Repell => {
                let alpha = gen.repell_strength / d_total as f64;
                let beta = alpha;
                let mut w = vec![0.0; n];
                for j in graph.pos_neighbors(i) {
                    if j != i {
                        w[j] = alpha;
                    }
                }
                for j in graph.neg_neighbors(i) {
                    w[j] = -beta;
                }
                // Diagonal completes the row to sum one.
                w[i] = 1.0 - alpha * (d_plus - 1) as f64 + beta * d_minus as f64;
                w
            }
            RuleType::Hk => vec![gen.confidence],
        };
        rules.push(AgentRule { rule, theta });
    }
    // Resample x0 until the HK well-posedness clause has headroom.
    let x0 = loop {
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let max = x0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gen.counts[3] == 0 || max > gen.confidence {
            break x0;
        }
    };
    Ok(MixedModel { graph, rules, x0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degroot_step_cases() {
        let x = [0.3, -0.5, 0.9];
        let e1 = [0.0, 1.0, 0.0];
        assert_eq!(step_degroot(&e1, &x).unwrap(), -0.5);
        let third = [1.0 / 3.0; 3];
        assert_abs_diff_eq!(step_degroot(&third, &[0.9, 0.0, -0.9]).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(step_degroot(&[0.7, 0.3], &[1.0, -1.0]).unwrap(), 0.4, epsilon = 1e-15);
        assert!(step_degroot(&[1.0], &x).is_err());
    }

    #[test]
    fn fj_step_cases() {
        let w = [0.25, 0.75];
        let x = [0.2, -0.6];
        let avg = step_degroot(&w, &x).unwrap();
        // lambda = 1 degenerates to DeGroot.
        assert_abs_diff_eq!(step_fj(&[0.25, 0.75, 1.0], &x, 0.9).unwrap(), avg, epsilon = 1e-15);
        // lambda = 0 is stubborn.
        assert_eq!(step_fj(&[0.25, 0.75, 0.0], &x, 0.9).unwrap(), 0.9);
        assert_abs_diff_eq!(step_fj(&[1.0, 0.5], &[0.4], 0.2).unwrap(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn repell_step_cases() {
        // Single negative neighbor, beta = 0.2, no other positive neighbors.
        assert_abs_diff_eq!(step_repell(&[1.2, -0.2], &[1.0, -1.0]).unwrap(), 1.4, epsilon = 1e-15);
        // Consensus is a fixed point because the weights sum to one.
        let theta = [1.1, 0.3, -0.4];
        let c = 0.37;
        assert_abs_diff_eq!(step_repell(&theta, &[c, c, c]).unwrap(), c, epsilon = 1e-15);
    }

    #[test]
    fn hk_step_cases() {
        let row: [i8; 3] = [1, 1, 1];
        let x = [0.0, 0.2, 1.0];
        // Large bound averages everyone.
        assert_abs_diff_eq!(step_hk(10.0, &row, &x, 0), 0.4, epsilon = 1e-15);
        // Zero bound keeps only the agent itself.
        assert_eq!(step_hk(0.0, &row, &x, 0), 0.0);
        assert_abs_diff_eq!(step_hk(0.5, &row, &x, 0), 0.1, epsilon = 1e-15);
    }

    fn small_mixed_model(seed: u64) -> MixedModel {
        let gen = ModelGenConfig::experiment_default(8, [2, 2, 2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_model(&gen, &mut rng).unwrap()
    }

    #[test]
    fn simulate_matches_per_equation_oracle() {
        // Independent straight-line evaluation of the four update equations.
        fn oracle_step(model: &MixedModel, x: &[f64]) -> Vec<f64> {
            let n = x.len();
            let mut out = vec![0.0; n];
            for i in 0..n {
                let r = &model.rules[i];
                out[i] = match r.rule {
                    RuleType::DeGroot => (0..n).map(|j| r.theta[j] * x[j]).sum(),
                    RuleType::Fj => {
                        let lam = r.theta[n];
                        let s: f64 = (0..n).map(|j| r.theta[j] * x[j]).sum();
                        lam * s + (1.0 - lam) * model.x0[i]
                    }
                    RuleType::Repell => (0..n).map(|j| r.theta[j] * x[j]).sum(),
                    RuleType::Hk => {
                        let c = r.theta[0];
                        let members: Vec<usize> = (0..n)
                            .filter(|&j| model.graph.entry(i, j) != 0 && (x[j] - x[i]).abs() <= c)
                            .collect();
                        members.iter().map(|&j| x[j]).sum::<f64>() / members.len() as f64
                    }
                };
            }
            out
        }

        for seed in [1u64, 2, 3] {
            let model = small_mixed_model(seed);
            let traj = simulate(&model, 6).unwrap();
            let mut x = model.x0.clone();
            for t in 0..6 {
                x = oracle_step(&model, &x);
                for i in 0..x.len() {
                    assert_abs_diff_eq!(traj.state(t + 1)[i], x[i], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn consensus_initial_state_is_fixed_point_for_degroot() {
        let n = 4;
        let graph = SignedGraph::from_adjacency(n, vec![1; n * n]);
        let rules: Vec<AgentRule> = (0..n)
            .map(|_| AgentRule { rule: RuleType::DeGroot, theta: vec![0.25; n] })
            .collect();
        let model = MixedModel { graph, rules, x0: vec![0.42; n] };
        let traj = simulate(&model, 3).unwrap();
        for t in 0..=3 {
            for i in 0..n {
                assert_abs_diff_eq!(traj.state(t)[i], 0.42, epsilon = 1e-15);
            }
        }
        assert_eq!(simulate(&model, 1).unwrap().len(), 2);
    }

    #[test]
    fn validate_flags_each_clause() {
        let model = small_mixed_model(11);
        assert!(validate_assumptions(&model, 0.1).is_empty());

        // A DeGroot agent handed a negative edge violates clause (iii).
        let mut bad = model.clone();
        let n = bad.graph.n();
        let mut adj: Vec<i8> = (0..n * n).map(|k| bad.graph.entry(k / n, k % n)).collect();
        adj[1] = -1;
        adj[n] = -1;
        bad.graph = SignedGraph::from_adjacency(n, adj);
        let report = validate_assumptions(&bad, 0.1);
        assert!(report
            .iter()
            .any(|v| matches!(v, AssumptionViolation::NegativeEdgeRuleMismatch { .. })));

        // An HK bound above the initial opinion range violates clause (iv).
        let mut bad = model.clone();
        let x0_max = bad.x0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for r in &mut bad.rules {
            if r.rule == RuleType::Hk {
                r.theta[0] = 2.0 * x0_max;
            }
        }
        let report = validate_assumptions(&bad, 0.1);
        assert!(report.iter().any(|v| matches!(v, AssumptionViolation::HkBoundTooLarge { .. })));
    }

    #[test]
    fn sample_model_defaults() {
        let n = 20;
        let gen = ModelGenConfig::experiment_default(n, [5, 5, 5, 5]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = sample_model(&gen, &mut rng).unwrap();
        for m in 0..4 {
            let count = model.rules.iter().filter(|r| r.rule == RuleType::from_arm_index(m)).count();
            assert_eq!(count, 5);
        }
        assert!(model.x0.iter().all(|v| (-1.0..1.0).contains(v)));
        for (i, r) in model.rules.iter().enumerate() {
            match r.rule {
                RuleType::Fj => assert_eq!(*r.theta.last().unwrap(), 0.5),
                RuleType::Repell => {
                    let (dp, dm) = model.graph.degrees(i).unwrap();
                    let alpha = 0.2 / (dp + dm) as f64;
                    for j in model.graph.pos_neighbors(i) {
                        if j != i {
                            assert_abs_diff_eq!(r.theta[j], alpha, epsilon = 1e-15);
                        }
                    }
                    let sum: f64 = r.theta.iter().sum();
                    assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
                }
                _ => {}
            }
        }
    }

    #[test]
    fn linear_steps_are_scale_covariant() {
        let theta = [0.2, 0.5, 0.3];
        let x = [0.7, -0.1, 0.4];
        let sx: Vec<f64> = x.iter().map(|v| v * -2.5).collect();
        assert_abs_diff_eq!(
            step_degroot(&theta, &sx).unwrap(),
            -2.5 * step_degroot(&theta, &x).unwrap(),
            epsilon = 1e-14
        );
    }
}
