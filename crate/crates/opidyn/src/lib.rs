//! Joint inference of network topology and per-agent opinion-update rules
//! from observed opinion trajectories.
//!
//! A mixed opinion model assigns each agent one of four update rules
//! (weighted averaging, stubborn-anchored averaging, repelling signed
//! averaging, bounded-confidence averaging) over a single signed graph.
//! Given one short trajectory, the bandit search in [`bandit`] jointly
//! estimates the adjacency structure, each agent's rule, and the rule
//! parameters, by scoring candidate neighborhoods with the single-rule
//! learners in [`learners`]. The [`harness`] module runs the full
//! benchmark protocol against the baselines in [`baselines`].

pub mod bandit;
pub mod baselines;
pub mod convex;
pub mod dynamics;
pub mod graph;
pub mod harness;
pub mod learners;
pub mod metrics;

pub use bandit::{epsilon_greedy, epsilon_greedy_plus, BanditConfig, JointEstimate};
pub use dynamics::{simulate, MixedModel, RuleType, Trajectory};
pub use graph::SignedGraph;
pub use learners::LearnerConfig;
