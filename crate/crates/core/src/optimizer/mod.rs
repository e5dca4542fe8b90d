//! Decision center: candidate-set construction, the branch-and-bound joint
//! server selection and allocation search, and the RM/CM/BM baselines.

mod baselines;
mod bnb;
pub mod exhaustive;
mod problem;

pub use baselines::{bm_baseline, cm_baseline, rm_baseline};
pub use bnb::{branch_and_bound, lower_bound, search, BnbOptions, SearchNode, SearchOutcome, SearchStats};
pub use problem::{
    allocation_levels, candidate_set, evaluate, feasible, AllocationPolicy, Assignment, Candidate, DecisionSet, Link,
    OffloadDecision, Problem, Quantum, CAPACITY_TOL,
};
