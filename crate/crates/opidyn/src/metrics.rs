//! Evaluation metrics: topology recovery rates, one-step prediction error,
//! and per-rule classification accuracy.

use rand::Rng;

use crate::dynamics::{step_model, MixedModel, RuleType};

/// True/false positive rates over directed off-diagonal entries, presence
/// based (signs ignored). Vacuous populations yield a perfect score for that
/// rate (no positives: TPR 1; no negatives: FPR 0).
pub fn tpr_fpr(truth: &[Vec<i8>], estimate: &[Vec<i8>]) -> (f64, f64) {
    let n = truth.len();
    assert_eq!(estimate.len(), n, "dimension mismatch");
    assert!(truth.iter().chain(estimate).all(|r| r.len() == n), "dimension mismatch");
    let (mut tp, mut fp, mut p, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let t = truth[i][j] != 0;
            let e = estimate[i][j] != 0;
            if t {
                p += 1;
                if e {
                    tp += 1;
                }
            } else {
                neg += 1;
                if e {
                    fp += 1;
                }
            }
        }
    }
    let tpr = if p == 0 { 1.0 } else { tp as f64 / p as f64 };
    let fpr = if neg == 0 { 0.0 } else { fp as f64 / neg as f64 };
    (tpr, fpr)
}

/// RMSE of one-step prediction over fresh uniform initial states:
/// `sqrt(sum_g ||xhat(1) - x(1)||^2 / n_pairs)`. The predictor maps an
/// initial state to the predicted next state.
pub fn prediction_rmse<R: Rng>(
    predictor: &dyn Fn(&[f64]) -> Vec<f64>,
    model: &MixedModel,
    n_pairs: usize,
    rng: &mut R,
) -> f64 {
    assert!(n_pairs > 0);
    let n = model.graph.n();
    let mut sq_sum = 0.0;
    for _ in 0..n_pairs {
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x1 = step_model(model, &x0).expect("true model steps on any state");
        let pred = predictor(&x0);
        assert_eq!(pred.len(), n);
        sq_sum += x1.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    (sq_sum / n_pairs as f64).sqrt()
}

/// Fraction of correctly classified agents per rule type, indexed by arm.
/// Rules with no agents in the truth get NaN.
pub fn rule_accuracy(rules_true: &[RuleType], rules_hat: &[RuleType]) -> [f64; 4] {
    assert_eq!(rules_true.len(), rules_hat.len(), "length mismatch");
    let mut total = [0usize; 4];
    let mut correct = [0usize; 4];
    for (t, h) in rules_true.iter().zip(rules_hat) {
        let m = t.arm_index();
        total[m] += 1;
        if t == h {
            correct[m] += 1;
        }
    }
    std::array::from_fn(|m| {
        if total[m] == 0 {
            f64::NAN
        } else {
            correct[m] as f64 / total[m] as f64
        }
    })
}
