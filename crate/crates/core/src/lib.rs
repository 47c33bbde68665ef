// Domain checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod advisor;
pub mod effort;
pub mod error;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod partition;

pub use error::{Error, Result};

pub use advisor::{
    best_response_iteration, objective, optimal_threshold, policy_curve, BeliefRule, ObjectiveBreakdown,
    PolicyClass, PolicyCurve, ThresholdChoice,
};
pub use effort::{solve_effort, EffortMethod, EffortSolution};
pub use model::{
    AbilityBranch, AbilityPosterior, Branch, ComplexityBelief, PostingCost, Primitives, Regime, Setting,
    Technology, TestNoise,
};
pub use numerics::{Maximum, Tolerance};
pub use partition::{PartitionClass, PartitionPoint, SeparatingKnob};
