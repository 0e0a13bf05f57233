//! Contextual dueling bandits with adversarially flipped preference labels.
//!
//! Learners: the uncertainty-weighted MLE policies RCDB and RCDB-S plus the
//! unweighted baselines MaxInP, CoLSTIM and MaxPairUCB. The [`harness`]
//! module runs them against budgeted label-flipping attacks.

pub mod adversary;
pub mod config;
pub mod environment;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod link;
pub mod policy;

pub use adversary::{AttackConfig, AttackKind, AttackState, Corruption};
pub use config::{PolicyConfig, RunConfig};
pub use environment::{build_env, ActionSetSpec, EnvModel, ThetaMode};
pub use error::{Error, Result};
pub use harness::{aggregate, run_all, run_episode, run_policy, sweep_budget, AggregateResult, RunResult, SweepRow};
pub use link::LinkSpec;
pub use policy::{DuelPolicy, PolicyKind};
