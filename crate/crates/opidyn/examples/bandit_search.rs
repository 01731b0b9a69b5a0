//! Joint topology-and-rule estimation with the epsilon-greedy bandit search.
//!
//! No hints here: the search starts from self-loops only, alternates between
//! exploiting the current Q-table and exploring random rules/adjacencies, and
//! refines one edge per agent per iteration.
//!
//!     cargo run --example bandit_search

use opidyn::bandit::{epsilon_greedy_traced, BanditConfig};
use opidyn::dynamics::{sample_model, simulate, ModelGenConfig};
use opidyn::learners::LearnerConfig;
use opidyn::metrics::{rule_accuracy, tpr_fpr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let n = 16;
    let t = 20;
    let gen = ModelGenConfig::experiment_default(n, [4, 4, 4, 4]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = sample_model(&gen, &mut rng).unwrap();
    let traj = simulate(&model, t).unwrap();

    let cfg = BanditConfig::experiment_default(n, t);
    let lcfg = LearnerConfig::default();
    let mut search_rng = ChaCha8Rng::seed_from_u64(12);

    let truth_rows: Vec<Vec<i8>> = (0..n).map(|i| model.graph.row(i).to_vec()).collect();
    let est = epsilon_greedy_traced(&traj, &cfg, &lcfg, &mut search_rng, &mut |l, state| {
        if l % 5 == 0 {
            // Track topology quality of the per-agent best arms as we go.
            let rows: Vec<Vec<i8>> = (0..n)
                .map(|i| {
                    let m = (0..4)
                        .min_by(|&a, &b| {
                            state.best_err[i][a].partial_cmp(&state.best_err[i][b]).unwrap()
                        })
                        .unwrap();
                    state.adj_by_rule[m][i].clone()
                })
                .collect();
            let (tpr, fpr) = tpr_fpr(&truth_rows, &rows);
            println!("iteration {l:>2}: tpr {tpr:.3} fpr {fpr:.3}");
        }
    });

    let (tpr, fpr) = tpr_fpr(&truth_rows, &est.adjacency);
    let truth_rules: Vec<_> = model.rules.iter().map(|r| r.rule).collect();
    let acc = rule_accuracy(&truth_rules, &est.rules);
    println!();
    println!("final estimate: tpr {tpr:.3} fpr {fpr:.3}");
    println!(
        "rule accuracy: averaging {:.2}, stubborn {:.2}, repelling {:.2}, bounded {:.2}",
        acc[0], acc[1], acc[2], acc[3]
    );
    for i in 0..n {
        println!(
            "agent {i:>2}: true {:<8} estimated {:<8}",
            model.rules[i].rule.to_string(),
            est.rules[i].to_string()
        );
    }
}
