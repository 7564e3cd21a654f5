//! Regenerates `data/ks_n128_lambda0.1828.txt`, a converged steady state of the
//! modified KS problem at λ = 0.1828 (n = 128, A = 8.09).
//!
//! Route: a wave-number-2 state at λ = 0.1828 is perturbed toward a drifting
//! wave, converged at λ = 0.15, and then followed back up to λ = 0.1828 by
//! damped Newton iterations at fixed λ.
//!
//! cargo run --release --example gen_ks_fixture [output path]

use std::path::PathBuf;

use pampac::io::CurveWriter;
use pampac::problem::{bordered_newton_step, residual_norm, CurvePoint, Direction};
use pampac::problems::ks::KS_AMPLITUDE;
use pampac::problems::spectral::Spectral;
use pampac::problems::{KsConfig, KsProblem};

const N: usize = 128;
const TARGET_LAMBDA: f64 = 0.1828;

fn newton_at_fixed_lambda(problem: &KsProblem, mut z: Vec<f64>, iterations: usize) -> Vec<f64> {
    let axis = Direction::axis(N + 2, N + 1);
    for _ in 0..iterations {
        let r0 = residual_norm(problem, &z).unwrap();
        if r0 < 1e-11 {
            break;
        }
        let full = bordered_newton_step(problem, &z, &axis, &z, 0.0).expect("Newton step");
        let mut a = 1.0;
        let mut trial = full.clone();
        while a > 1e-4 {
            trial = z.iter().zip(&full).map(|(u, v)| u + a * (v - u)).collect();
            if residual_norm(problem, &trial).unwrap() < r0 {
                break;
            }
            a *= 0.5;
        }
        z = trial;
    }
    z
}

fn with_template(w: &[f64]) -> KsProblem {
    KsProblem::new(KsConfig { n_grid: N, amplitude_a: KS_AMPLITUDE, reference_profile: w.to_vec() }).unwrap()
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/ks_n128_lambda0.1828.txt"));
    let x = Spectral::new(N).grid();

    let w2: Vec<f64> = x.iter().map(|x| 2.0 * (2.0 * x).sin()).collect();
    let mut z = w2.clone();
    z.extend([0.0, TARGET_LAMBDA]);
    let z = newton_at_fixed_lambda(&with_template(&w2), z, 60);

    let w: Vec<f64> = z[..N]
        .iter()
        .zip(&x)
        .map(|(v, x)| v + 0.3 * x.cos() + 0.15 * (3.0 * x + 0.3).sin())
        .collect();
    let problem = with_template(&w);
    let mut z = w.clone();
    z.extend([1.0, 0.15]);
    z = newton_at_fixed_lambda(&problem, z, 100);
    eprintln!("lambda = 0.15: c = {:+.6}, residual {:.2e}", z[N], residual_norm(&problem, &z).unwrap());

    let steps = 40;
    for k in 0..steps {
        z[N + 1] = 0.155 + (TARGET_LAMBDA - 0.155) * k as f64 / (steps - 1) as f64;
        z = newton_at_fixed_lambda(&problem, z, 50);
    }
    z[N + 1] = TARGET_LAMBDA;
    z = newton_at_fixed_lambda(&problem, z, 50);

    // the shipped template is the state itself
    let problem = with_template(&z[..N]);
    let point = CurvePoint::evaluate(&problem, z).unwrap();
    let norm_w = point.z[..N].iter().map(|v| v * v).sum::<f64>().sqrt();
    eprintln!(
        "lambda = {}: c = {:+.3e}, |w| = {norm_w:.4}, residual {:.2e}",
        point.z[N + 1],
        point.z[N],
        point.residual_norm
    );
    assert!(point.residual_norm <= 5e-7, "fixture did not converge");
    let mut writer = CurveWriter::create(&out).unwrap();
    writer.write(&point).unwrap();
    eprintln!("wrote {}", out.display());
}
