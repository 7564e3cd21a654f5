//! Problems shipped with the crate.

mod circle;
pub mod ks;
pub mod spectral;

pub use circle::{circle_problem, CIRCLE_START};
pub use ks::{ks_problem, KsConfig, KsProblem};
