//! Parallel adaptive pseudo-arclength continuation.
//!
//! A continuation run follows a solution curve of `F(z) = 0`, `F: R^N -> R^(N-1)`,
//! by keeping a tree of speculative predictor-corrector sequences busy on a
//! fixed budget of workers. See [`engine::run_continuation`] for the driver and
//! [`baselines`] for the single-threaded reference algorithms.

pub mod baselines;
pub mod cli;
pub mod engine;
mod error;
pub mod io;
pub mod linalg;
pub mod params;
pub mod problem;
pub mod problems;
pub mod tree;

pub use engine::{run_continuation, ContinuationResult, EngineOptions, TerminationReason};
pub use error::{Error, Result};
pub use params::RunParams;
pub use problem::{CurvePoint, Direction, Problem, ProblemDefinition, StepFailure};
pub use tree::{Color, TreeNode};
