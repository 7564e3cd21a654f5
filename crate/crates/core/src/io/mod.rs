//! File formats: parameter files, curve files and DOT tree snapshots.

pub mod curve;
pub mod dot;
pub mod params_file;

pub use curve::{read_curve, read_initial_point, write_curve_point, CurveWriter};
pub use dot::{export_dot, parse_dot, tree_to_dot, DotGraph};
pub use params_file::{parse_parameters, read_parameters, write_parameters};
