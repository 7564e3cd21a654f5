mod common;

use common::*;
use pampac::problem::{central_difference_jacobian, residual_norm, Problem};

#[test]
fn fixture_is_converged() {
    let (problem, z) = ks_fixture();
    assert_eq!(z.len(), 130);
    assert_eq!(z[129], 0.1828);
    assert!(residual_norm(&problem, &z).unwrap() <= 5e-7);
}

#[test]
fn fixture_jacobian_matches_finite_differences() {
    let (problem, z) = ks_fixture();
    let exact = problem.jacobian(&z).unwrap();
    let approx = central_difference_jacobian(&problem, &z, 1e-6);
    let diff: f64 = exact.as_slice().iter().zip(approx.as_slice()).map(|(a, b)| (a - b).powi(2)).sum();
    let scale: f64 = exact.as_slice().iter().map(|a| a * a).sum();
    let rel = (diff / scale).sqrt();
    assert!(rel <= 1e-5, "relative error {rel:e}");
}
