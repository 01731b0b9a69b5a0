//! Regression baselines on the same data the structured learners consume.
//!
//! Ordinary least squares, sign-constrained least squares, and Gaussian
//! process regression all fit the one-step map from an augmented design
//! (current state plus the agent's initial opinion). They need no model
//! structure, but they also cannot exploit it: compare their edge maps and
//! prediction errors with the bandit estimate from `bandit_search`.
//!
//!     cargo run --example baseline_regressions

use opidyn::baselines::{coeff_adjacency_row, ols_fit, ss_fit, AugmentedDesign, GprModel};
use opidyn::dynamics::{sample_model, simulate, ModelGenConfig};
use opidyn::metrics::{prediction_rmse, tpr_fpr};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let n = 16;
    let t = 20;
    let gen = ModelGenConfig::experiment_default(n, [4, 4, 4, 4]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = sample_model(&gen, &mut rng).unwrap();
    let traj = simulate(&model, t).unwrap();

    let designs: Vec<AugmentedDesign> = (0..n).map(|i| AugmentedDesign::from_trajectory(&traj, i)).collect();

    // Coefficient vectors per agent for the two linear baselines.
    let ols: Vec<Vec<f64>> = designs.iter().map(|d| ols_fit(d).0).collect();
    let ss: Vec<Vec<f64>> = designs.iter().map(|d| ss_fit(d).0).collect();
    let truth_rows: Vec<Vec<i8>> = (0..n).map(|i| model.graph.row(i).to_vec()).collect();

    for (name, coeffs) in [("OLS", &ols), ("sign-constrained LS", &ss)] {
        let rows: Vec<Vec<i8>> = coeffs.iter().map(|c| coeff_adjacency_row(c, n)).collect();
        let (tpr, fpr) = tpr_fpr(&truth_rows, &rows);
        println!("{name:<20} edge map: tpr {tpr:.3} fpr {fpr:.3}");
    }

    // One-step prediction error over fresh random initial states.
    let mut eval_rng = ChaCha8Rng::seed_from_u64(99);
    let linear_predictor = |coeffs: &Vec<Vec<f64>>, x0: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut q = x0.to_vec();
                q.push(x0[i]);
                coeffs[i].iter().zip(&q).map(|(c, v)| c * v).sum()
            })
            .collect()
    };
    for (name, coeffs) in [("OLS", &ols), ("sign-constrained LS", &ss)] {
        let rmse = prediction_rmse(&|x0: &[f64]| linear_predictor(coeffs, x0), &model, 50, &mut eval_rng);
        println!("{name:<20} prediction rmse: {rmse:.3}");
    }

    let gpr: Vec<GprModel> = designs
        .iter()
        .map(|d| GprModel::fit(&d.rows, &d.target, 1e-6, None))
        .collect();
    let rmse = prediction_rmse(
        &|x0: &[f64]| {
            (0..n)
                .map(|i| {
                    let mut q = x0.to_vec();
                    q.push(x0[i]);
                    gpr[i].predict(&q)
                })
                .collect()
        },
        &model,
        50,
        &mut eval_rng,
    );
    println!("{:<20} prediction rmse: {rmse:.3}", "GPR");
}
