//! Constant-modulus sequence-set design by direct peak-sidelobe-level
//! minimization, plus a MIMO radar imaging evaluator for the designed
//! sets.
//!
//! The design loop alternates three pieces: the [`correlation`] module
//! computes aperiodic correlations and the PSL/ISL metrics, [`surrogate`]
//! assembles a per-iterate linear bound for every penalized correlation,
//! and [`mda`] solves the resulting simplex problem with multiplicative
//! updates, after which [`solver`] recovers the next unit-modulus iterate.
//! The [`radar`] module evaluates finished sets in a simulated angle-range
//! imaging experiment.

pub mod correlation;
pub mod error;
pub mod io;
pub mod mda;
pub mod radar;
pub mod sequence;
pub mod solver;
pub mod surrogate;

pub use correlation::{
    correlate_all_fft, correlate_brute, isl, psl, psl_argmax, CorrelationTable, LagConstraint,
    LagConstraintSet,
};
pub use error::{Error, Result};
pub use mda::{inner_minimize_x, mda_solve, MdaConfig, MdaResult, SimplexPoint, StepRule};
pub use sequence::SequenceSet;
pub use solver::{
    design, init_random, stopping_eps, IterationRecord, SolverConfig, SolverTrace,
    TerminationStatus,
};
pub use surrogate::{
    build_surrogate, build_surrogate_inflated, lambda_bound_d, lambda_max_phi, stacked_to_real,
    EigenBound, EigenMode, SurrogateSystem,
};
