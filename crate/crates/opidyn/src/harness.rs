//! Experiment orchestration: the benchmark protocol (random mixed models,
//! several horizons, the full algorithm roster), metric computation, and
//! deterministic CSV emission.

use std::fmt;
use std::io;
use std::path::Path;

use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::{
    epsilon_greedy, epsilon_greedy_plus, initial_estimate, BanditConfig, JointEstimate,
    LearnerVariant,
};
use crate::baselines::{coeff_adjacency_row, ss_fit, ols_fit, AugmentedDesign, GprModel};
use crate::dynamics::{sample_model, simulate, MixedModel, ModelGenConfig, Trajectory};
use crate::learners::LearnerConfig;
use crate::metrics::{prediction_rmse, rule_accuracy, tpr_fpr};

/// Full experiment configuration; every field has the benchmark default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    /// Agents per rule (averaging, stubborn, repelling, bounded-confidence).
    pub agents_per_rule: [usize; 4],
    pub horizons: Vec<usize>,
    pub n_graphs: usize,
    pub eval_pairs: usize,
    /// Link probability; `1.1 ln(n) / n` when absent.
    pub p_link: Option<f64>,
    pub lambda: f64,
    pub confidence: f64,
    pub repell_strength: f64,
    pub eps_m: f64,
    pub eps_g: f64,
    pub step_alpha: f64,
    pub n_iter: usize,
    pub b_g: usize,
    pub eps_w: f64,
    pub eps_lambda: f64,
    pub eps_c: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 20,
            agents_per_rule: [5, 5, 5, 5],
            horizons: vec![10, 15, 20],
            n_graphs: 10,
            eval_pairs: 50,
            p_link: None,
            lambda: 0.5,
            confidence: 0.25,
            repell_strength: 0.2,
            eps_m: 0.2,
            eps_g: 0.2,
            step_alpha: 0.1,
            n_iter: 20,
            b_g: 16,
            eps_w: 0.001,
            eps_lambda: 0.1,
            eps_c: 1e-6,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.agents_per_rule.iter().sum::<usize>() != self.n {
            return Err("agents_per_rule must sum to n".into());
        }
        if self.horizons.iter().any(|&t| t < 2) {
            return Err("horizons must be at least 2".into());
        }
        if self.n_graphs == 0 || self.eval_pairs == 0 {
            return Err("n_graphs and eval_pairs must be positive".into());
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn model_gen(&self) -> ModelGenConfig {
        let mut gen = ModelGenConfig::experiment_default(self.n, self.agents_per_rule);
        if let Some(p) = self.p_link {
            gen.graph.p_link = p;
        }
        gen.lambda = self.lambda;
        gen.confidence = self.confidence;
        gen.repell_strength = self.repell_strength;
        gen
    }

    pub fn learner_cfg(&self) -> LearnerConfig {
        LearnerConfig {
            eps_w: self.eps_w,
            eps_lambda: self.eps_lambda,
            eps_c: self.eps_c,
            ..LearnerConfig::default()
        }
    }

    pub fn bandit_cfg(&self, t: usize) -> BanditConfig {
        BanditConfig {
            eps_m: self.eps_m,
            eps_g: self.eps_g,
            step_alpha: self.step_alpha,
            n_iter: self.n_iter,
            t_split: 4 * t / 5,
            b_g: self.b_g,
            explore_p: self.p_link.unwrap_or(1.1 * (self.n as f64).ln() / self.n as f64),
        }
    }
}

/// The algorithm roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Ie,
    Eg,
    Rs,
    Ols,
    Ss,
    Gpr,
    IePlus,
    EgPlus,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Ie,
        Algorithm::Eg,
        Algorithm::Rs,
        Algorithm::Ols,
        Algorithm::Ss,
        Algorithm::Gpr,
        Algorithm::IePlus,
        Algorithm::EgPlus,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Algorithm::Ie => "IE",
            Algorithm::Eg => "eG",
            Algorithm::Rs => "RS",
            Algorithm::Ols => "OLS",
            Algorithm::Ss => "SS",
            Algorithm::Gpr => "GPR",
            Algorithm::IePlus => "IEp",
            Algorithm::EgPlus => "eGp",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.code() == s)
            .ok_or_else(|| format!("unknown algorithm '{s}' (expected one of IE,eG,RS,OLS,SS,GPR,IEp,eGp)"))
    }

    pub fn parse_list(s: &str) -> Result<Vec<Self>, String> {
        s.split(',').map(|p| Algorithm::parse(p.trim())).collect()
    }

    /// Estimates topology (excluded: the kernel regressor).
    pub fn has_topology(self) -> bool {
        self != Algorithm::Gpr
    }

    /// Estimates per-agent rules (the bandit family only).
    pub fn has_rules(self) -> bool {
        matches!(self, Algorithm::Ie | Algorithm::Eg | Algorithm::Rs | Algorithm::IePlus | Algorithm::EgPlus)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Deterministic seed derivation (splitmix-style mixing), so every run owns
/// an independent stream regardless of scheduling.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e3779b97f4a7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

/// One run's metric rows.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub graph: usize,
    pub horizon: usize,
    pub algo: Algorithm,
    pub metrics: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub runs: Vec<RunRecord>,
    /// Roster and horizons in emission order, for aggregation.
    algos: Vec<Algorithm>,
    horizons: Vec<usize>,
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ExperimentResults {
    pub fn values(&self, algo: Algorithm, horizon: usize, metric: &str) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| r.algo == algo && r.horizon == horizon)
            .flat_map(|r| r.metrics.iter().filter(|(m, _)| m == metric).map(|(_, v)| *v))
            .collect()
    }

    pub fn mean(&self, algo: Algorithm, horizon: usize, metric: &str) -> Option<f64> {
        let v = self.values(algo, horizon, metric);
        if v.is_empty() {
            None
        } else {
            Some(v.iter().sum::<f64>() / v.len() as f64)
        }
    }

    pub fn median(&self, algo: Algorithm, horizon: usize, metric: &str) -> Option<f64> {
        let mut v = self.values(algo, horizon, metric);
        if v.is_empty() {
            return None;
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = v.len();
        Some(if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) })
    }

    /// Long-format per-run table.
    pub fn results_csv(&self) -> String {
        let mut out = String::from("run,algorithm,T,metric,value\n");
        for r in &self.runs {
            for (m, v) in &r.metrics {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.graph + 1,
                    csv_field(r.algo.code()),
                    r.horizon,
                    csv_field(m),
                    v
                ));
            }
        }
        out
    }

    /// Aggregate table recomputed from the per-run rows.
    pub fn aggregates_csv(&self) -> String {
        let mut out = String::from("algorithm,T,metric,stat,value\n");
        let metric_names: Vec<String> = {
            let mut names: Vec<String> = Vec::new();
            for r in &self.runs {
                for (m, _) in &r.metrics {
                    if !names.contains(m) {
                        names.push(m.clone());
                    }
                }
            }
            names
        };
        for &algo in &self.algos {
            for &t in &self.horizons {
                for m in &metric_names {
                    if let Some(mean) = self.mean(algo, t, m) {
                        out.push_str(&format!("{},{},{},mean,{}\n", csv_field(algo.code()), t, csv_field(m), mean));
                        let med = self.median(algo, t, m).unwrap();
                        out.push_str(&format!("{},{},{},median,{}\n", csv_field(algo.code()), t, csv_field(m), med));
                    }
                }
            }
        }
        out
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("results.csv"), self.results_csv())?;
        std::fs::write(dir.join("aggregates.csv"), self.aggregates_csv())?;
        Ok(())
    }
}

fn truth_rows(model: &MixedModel) -> Vec<Vec<i8>> {
    (0..model.graph.n()).map(|i| model.graph.row(i).to_vec()).collect()
}

fn bandit_metrics(
    est: &JointEstimate,
    model: &MixedModel,
    gen: &ModelGenConfig,
    eval_pairs: usize,
    eval_seed: u64,
) -> Vec<(String, f64)> {
    let mut rows = Vec::new();
    let (tpr, fpr) = tpr_fpr(&truth_rows(model), &est.adjacency);
    rows.push(("tpr".to_string(), tpr));
    rows.push(("fpr".to_string(), fpr));
    let mut rng = ChaCha8Rng::seed_from_u64(eval_seed);
    let rmse = prediction_rmse(&|x0: &[f64]| est.predict_state(x0), model, eval_pairs, &mut rng);
    rows.push(("rmse".to_string(), rmse));
    let rules_true: Vec<_> = (0..model.graph.n()).map(|i| gen.rule_of(i)).collect();
    let acc = rule_accuracy(&rules_true, &est.rules);
    for (m, label) in ["accuracy_avg", "accuracy_stubborn", "accuracy_repell", "accuracy_bounded"].iter().enumerate() {
        if acc[m].is_finite() {
            rows.push((label.to_string(), acc[m]));
        }
    }
    rows
}

fn linear_baseline_metrics(
    algo: Algorithm,
    traj: &Trajectory,
    model: &MixedModel,
    eval_pairs: usize,
    eval_seed: u64,
) -> Vec<(String, f64)> {
    let n = traj.n();
    let mut coeffs: Vec<Option<Vec<f64>>> = Vec::with_capacity(n);
    let mut failures = 0usize;
    for i in 0..n {
        let design = AugmentedDesign::from_trajectory(traj, i);
        let (y, status) = match algo {
            Algorithm::Ols => ols_fit(&design),
            Algorithm::Ss => ss_fit(&design),
            _ => unreachable!("linear baselines only"),
        };
        if status.is_optimal() {
            coeffs.push(Some(y));
        } else {
            coeffs.push(None);
            failures += 1;
        }
    }
    let adjacency: Vec<Vec<i8>> = (0..n)
        .map(|i| match &coeffs[i] {
            Some(y) => coeff_adjacency_row(y, n),
            None => (0..n).map(|j| i8::from(j == i)).collect(),
        })
        .collect();
    let predictor = |x0: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| match &coeffs[i] {
                Some(y) => x0.iter().zip(&y[..n]).map(|(a, b)| a * b).sum::<f64>() + y[n] * x0[i],
                None => x0[i],
            })
            .collect()
    };
    let mut rows = Vec::new();
    let (tpr, fpr) = tpr_fpr(&truth_rows(model), &adjacency);
    rows.push(("tpr".to_string(), tpr));
    rows.push(("fpr".to_string(), fpr));
    let mut rng = ChaCha8Rng::seed_from_u64(eval_seed);
    rows.push(("rmse".to_string(), prediction_rmse(&predictor, model, eval_pairs, &mut rng)));
    rows.push(("fit_failures".to_string(), failures as f64));
    rows
}

fn gpr_metrics(traj: &Trajectory, model: &MixedModel, eval_pairs: usize, eval_seed: u64) -> Vec<(String, f64)> {
    let n = traj.n();
    let models: Vec<GprModel> = (0..n)
        .map(|i| {
            let design = AugmentedDesign::from_trajectory(traj, i);
            GprModel::fit(&design.rows, &design.target, 1e-6, None)
        })
        .collect();
    let predictor = |x0: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut q = x0.to_vec();
                q.push(x0[i]);
                models[i].predict(&q)
            })
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(eval_seed);
    vec![("rmse".to_string(), prediction_rmse(&predictor, model, eval_pairs, &mut rng))]
}

fn run_one(
    cfg: &ExperimentConfig,
    gen: &ModelGenConfig,
    model: &MixedModel,
    traj_full: &Trajectory,
    graph_idx: usize,
    t: usize,
    algo: Algorithm,
    master_seed: u64,
) -> RunRecord {
    let traj = traj_full.truncated(t);
    let lcfg = cfg.learner_cfg();
    let bcfg = cfg.bandit_cfg(t);
    let algo_seed = derive_seed(master_seed, &[2, graph_idx as u64, t as u64, algo.code().len() as u64, algo as u64]);
    let eval_seed = derive_seed(master_seed, &[3, graph_idx as u64, t as u64]);
    let metrics = match algo {
        Algorithm::Ie => {
            let est = initial_estimate(&traj, &bcfg, &lcfg, LearnerVariant::L1);
            bandit_metrics(&est, model, gen, cfg.eval_pairs, eval_seed)
        }
        Algorithm::IePlus => {
            let est = initial_estimate(&traj, &bcfg, &lcfg, LearnerVariant::L1Plus);
            bandit_metrics(&est, model, gen, cfg.eval_pairs, eval_seed)
        }
        Algorithm::Eg => {
            let mut rng = ChaCha8Rng::seed_from_u64(algo_seed);
            let est = epsilon_greedy(&traj, &bcfg, &lcfg, &mut rng);
            bandit_metrics(&est, model, gen, cfg.eval_pairs, eval_seed)
        }
        Algorithm::Rs => {
            let mut rng = ChaCha8Rng::seed_from_u64(algo_seed);
            let est = epsilon_greedy(&traj, &bcfg.clone().random_search(), &lcfg, &mut rng);
            bandit_metrics(&est, model, gen, cfg.eval_pairs, eval_seed)
        }
        Algorithm::EgPlus => {
            let mut rng = ChaCha8Rng::seed_from_u64(algo_seed);
            let est = epsilon_greedy_plus(&traj, &bcfg, &lcfg, &mut rng);
            bandit_metrics(&est, model, gen, cfg.eval_pairs, eval_seed)
        }
        Algorithm::Ols | Algorithm::Ss => linear_baseline_metrics(algo, &traj, model, cfg.eval_pairs, eval_seed),
        Algorithm::Gpr => gpr_metrics(&traj, model, cfg.eval_pairs, eval_seed),
    };
    RunRecord { graph: graph_idx, horizon: t, algo, metrics }
}

/// Runs the full protocol. Deterministic in `master_seed` and independent of
/// the worker count: every run derives its own random stream and rows are
/// emitted in a fixed order.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    master_seed: u64,
    algos: &[Algorithm],
    jobs: Option<usize>,
) -> ExperimentResults {
    cfg.validate().expect("invalid experiment configuration");
    let gen = cfg.model_gen();
    let max_t = *cfg.horizons.iter().max().expect("nonempty horizons");

    // Ground-truth ensemble: one model and one long trajectory per graph.
    let ensemble: Vec<(MixedModel, Trajectory)> = (0..cfg.n_graphs)
        .map(|g| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, &[1, g as u64]));
            let model = sample_model(&gen, &mut rng).expect("model sampling failed");
            let traj = simulate(&model, max_t).expect("assumption-checked model simulates");
            (model, traj)
        })
        .collect();

    let specs: Vec<(usize, usize, Algorithm)> = (0..cfg.n_graphs)
        .flat_map(|g| {
            cfg.horizons
                .iter()
                .flat_map(move |&t| algos.iter().map(move |&a| (g, t, a)))
                .collect::<Vec<_>>()
        })
        .collect();

    let work = || -> Vec<RunRecord> {
        specs
            .par_iter()
            .map(|&(g, t, a)| run_one(cfg, &gen, &ensemble[g].0, &ensemble[g].1, g, t, a, master_seed))
            .collect()
    };
    let runs = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    };

    ExperimentResults { runs, algos: algos.to_vec(), horizons: cfg.horizons.clone() }
}
