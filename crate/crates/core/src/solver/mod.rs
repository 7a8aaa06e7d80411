//! Numerical search for left-invariant Einstein-Maxwell solutions.

pub mod candidate;
pub mod family;
pub mod lm;
pub mod refine;
pub mod search;

pub use candidate::{normalized_residual, residual_vector, Candidate, RESIDUAL_LEN};
pub use family::{verify_family, FamilyId, FamilyReport, GridSpec};
pub use lm::Status;
pub use refine::{refine, residual_jacobian, RefineOptions, Refined};
pub use search::{
    classify_algebra, multistart_search, AlgebraVerdict, Budget, ComputedVerdict, SearchMode, SearchOptions,
    SearchOutcome, Solution,
};

#[cfg(test)]
mod tests;
