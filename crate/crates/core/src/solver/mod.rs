//! Picard iteration for `theta = L f + sigma B[theta, theta]`, the perturbation
//! equation around the first two iterates, and sampled operator constants.

mod constants;
mod picard;

pub use constants::{estimate_constants, localized_pair_ratio, ConstantsConfig, ConstantsReport};
pub use picard::{
    perturbation_solve, picard_solve, picard_solve_from, IterationRecord, IterationTrace,
    PerturbationOutcome, SignConvention, SolveConfig, SolveOutcome, Verdict,
};
