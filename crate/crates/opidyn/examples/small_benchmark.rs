//! End-to-end benchmark on a reduced problem: a few graphs, all algorithms,
//! aggregate table printed at the end.
//!
//! The full-size configuration (`ExperimentConfig::default()`) is what the
//! `opidyn run` binary executes; this example shrinks it so it finishes in
//! well under a minute.
//!
//!     cargo run --release --example small_benchmark

use opidyn::harness::{run_experiment, Algorithm, ExperimentConfig};

fn main() {
    let cfg = ExperimentConfig {
        n: 12,
        agents_per_rule: [3, 3, 3, 3],
        horizons: vec![10, 20],
        n_graphs: 3,
        eval_pairs: 30,
        ..ExperimentConfig::default()
    };
    let algos = [Algorithm::Ie, Algorithm::Eg, Algorithm::Ols, Algorithm::Ss];
    let results = run_experiment(&cfg, 7, &algos, Some(1));

    println!("{:<6} {:>3}  {:>6}  {:>6}  {:>6}", "algo", "T", "tpr", "fpr", "rmse");
    for &a in &algos {
        for &t in &cfg.horizons {
            let g = |m: &str| results.mean(a, t, m).unwrap_or(f64::NAN);
            println!(
                "{:<6} {:>3}  {:>6.3}  {:>6.3}  {:>6.3}",
                a.code(),
                t,
                g("tpr"),
                g("fpr"),
                g("rmse")
            );
        }
    }
}
