//! Simulates a hand-built mixed-rule opinion model and prints the trajectory.
//!
//! Six agents on a signed graph: two plain averagers, one stubborn agent
//! anchored to its initial opinion, two repelling agents joined by an
//! antagonistic tie, and one bounded-confidence agent that only trusts
//! nearby opinions. Negative edges may only join repelling agents.
//!
//!     cargo run --example simulate_dynamics

use opidyn::dynamics::{simulate, AgentRule, MixedModel, RuleType};
use opidyn::graph::SignedGraph;

fn main() {
    let n = 6;
    // Adjacency with self loops; -1 marks the antagonistic tie between the
    // two repelling agents (3 and 4).
    #[rustfmt::skip]
    let adj: Vec<i8> = vec![
        1, 1, 0, 0, 1, 1,
        1, 1, 1, 0, 0, 0,
        0, 1, 1, 1, 0, 0,
        0, 0, 1, 1, -1, 0,
        1, 0, 0, -1, 1, 0,
        1, 0, 0, 0, 0, 1,
    ];
    let graph = SignedGraph::from_adjacency(n, adj);

    let rules = vec![
        // Plain averaging over the positive neighborhood (weights sum to 1).
        AgentRule { rule: RuleType::DeGroot, theta: vec![0.4, 0.2, 0.0, 0.0, 0.2, 0.2] },
        AgentRule { rule: RuleType::DeGroot, theta: vec![0.2, 0.5, 0.3, 0.0, 0.0, 0.0] },
        // Stubborn: blends the average with its initial opinion (weight 1 - 0.6).
        AgentRule { rule: RuleType::Fj, theta: vec![0.0, 0.3, 0.4, 0.3, 0.0, 0.0, 0.6] },
        // Repelling: the negative weight pushes away from the antagonist;
        // the row still sums to one, and the positive ties keep the pair
        // from running off.
        AgentRule { rule: RuleType::Repell, theta: vec![0.0, 0.0, 0.35, 0.7, -0.05, 0.0] },
        AgentRule { rule: RuleType::Repell, theta: vec![0.35, 0.0, 0.0, -0.05, 0.7, 0.0] },
        // Bounded confidence: averages the neighbors within distance 0.3.
        AgentRule { rule: RuleType::Hk, theta: vec![0.3] },
    ];

    let x0 = vec![0.8, 0.2, -0.1, -0.6, 0.9, 0.5];
    let model = MixedModel { graph, rules, x0 };

    let traj = simulate(&model, 15).expect("model satisfies the standing assumptions");
    print!("{}", traj.to_csv());

    // The repelling pair slows the contraction but the positive part of
    // the network wins: the spread shrinks over time.
    let spread = |t: usize| {
        let s = traj.state(t);
        s.iter().cloned().fold(f64::MIN, f64::max) - s.iter().cloned().fold(f64::MAX, f64::min)
    };
    eprintln!("opinion spread: t=0 {:.3}, t=5 {:.3}, t=15 {:.3}", spread(0), spread(5), spread(15));
}
