//! Travelling waves of a Kuramoto-Sivashinsky equation with an extra
//! `-A sin(u)` term, on the periodic domain `[0, 2π)`.
//!
//! In the co-moving frame a wave `w(x - ct)` solves
//! `-c w' + w w' + w'' + λ w'''' - A sin(w) = 0`. The unknowns are the grid
//! values of `w`, the speed `c` and `λ`; a phase condition against a fixed
//! template `w_ref` removes the translation freedom.

use crate::linalg::Matrix;
use crate::problem::Problem;
use crate::problems::spectral::Spectral;
use crate::{Error, Result};

/// Amplitude of the sin term used in the reference experiment.
pub const KS_AMPLITUDE: f64 = 8.09;

#[derive(Clone, Debug, PartialEq)]
pub struct KsConfig {
    pub n_grid: usize,
    pub amplitude_a: f64,
    /// Phase-condition template `w_ref`.
    pub reference_profile: Vec<f64>,
}

impl KsConfig {
    /// Config whose template is the `w` part of `z = (w, c, λ)`.
    pub fn from_point(amplitude_a: f64, z: &[f64]) -> Result<Self> {
        if z.len() < 3 {
            return Err(Error::Config("KS point needs at least 3 components".into()));
        }
        let n_grid = z.len() - 2;
        Ok(KsConfig { n_grid, amplitude_a, reference_profile: z[..n_grid].to_vec() })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_grid;
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Config(format!("KS grid size must be a power of two >= 16, got {n}")));
        }
        if self.reference_profile.len() != n {
            return Err(Error::Dimension { expected: n, actual: self.reference_profile.len() });
        }
        if !self.amplitude_a.is_finite() || self.reference_profile.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("KS configuration has non-finite values".into()));
        }
        let d = Spectral::new(n).derivative(&self.reference_profile, 1);
        if d.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-12 {
            return Err(Error::Config("reference profile must not be constant".into()));
        }
        Ok(())
    }
}

/// The discretized travelling-wave problem, `z = (w_0..w_{n-1}, c, λ)`.
#[derive(Debug)]
pub struct KsProblem {
    config: KsConfig,
    spectral: Spectral,
    d1: Matrix,
    d2: Matrix,
    d4: Matrix,
    dealias: Matrix,
    /// `D1 * P`
    d1_dealias: Matrix,
    /// `D1 w_ref / n`, the phase-condition gradient.
    phase_row: Vec<f64>,
}

pub fn ks_problem(config: KsConfig) -> Result<KsProblem> {
    KsProblem::new(config)
}

impl KsProblem {
    pub fn new(config: KsConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n_grid;
        let spectral = Spectral::new(n);
        let d1 = spectral.derivative_matrix(1);
        let dealias = spectral.dealias_matrix();
        let d1_dealias = d1.matmul(&dealias);
        let phase_row =
            spectral.derivative(&config.reference_profile, 1).iter().map(|v| v / n as f64).collect();
        Ok(KsProblem {
            d2: spectral.derivative_matrix(2),
            d4: spectral.derivative_matrix(4),
            d1,
            dealias,
            d1_dealias,
            phase_row,
            spectral,
            config,
        })
    }

    pub fn config(&self) -> &KsConfig {
        &self.config
    }

    pub fn n_grid(&self) -> usize {
        self.config.n_grid
    }

    fn split<'a>(&self, z: &'a [f64]) -> (&'a [f64], f64, f64) {
        let n = self.config.n_grid;
        assert_eq!(z.len(), n + 2, "KS state has wrong length");
        (&z[..n], z[n], z[n + 1])
    }
}

/// Residual of the discretized BVP plus the phase condition.
pub fn ks_residual(problem: &KsProblem, z: &[f64]) -> Vec<f64> {
    let (w, c, lambda) = problem.split(z);
    let s = &problem.spectral;
    let a = problem.config.amplitude_a;
    let pw = s.dealias(w);
    let dpw = s.derivative(&pw, 1);
    let product: Vec<f64> = pw.iter().zip(&dpw).map(|(u, v)| u * v).collect();
    let convection = s.dealias(&product);
    let (d1w, d2w, d4w) = (s.derivative(w, 1), s.derivative(w, 2), s.derivative(w, 4));
    let mut r: Vec<f64> = (0..w.len())
        .map(|j| -c * d1w[j] + convection[j] + d2w[j] + lambda * d4w[j] - a * w[j].sin())
        .collect();
    let phase: f64 = w
        .iter()
        .zip(&problem.config.reference_profile)
        .zip(&problem.phase_row)
        .map(|((wi, ri), g)| (wi - ri) * g)
        .sum();
    r.push(phase);
    r
}

impl Problem for KsProblem {
    fn n_dim(&self) -> usize {
        self.config.n_grid + 2
    }

    fn lambda_index(&self) -> usize {
        self.config.n_grid + 1
    }

    fn residual(&self, z: &[f64]) -> Vec<f64> {
        ks_residual(self, z)
    }

    fn jacobian(&self, z: &[f64]) -> Option<Matrix> {
        let (w, c, lambda) = self.split(z);
        let n = w.len();
        let a = self.config.amplitude_a;
        let pw = self.dealias.mul_vec(w);
        let dpw = self.d1.mul_vec(&pw);
        // d/dw of P[(Pw)(D P w)] = P (diag(D P w) P + diag(P w) D P)
        let mut inner = self.dealias.scale_rows(&dpw);
        let second = self.d1_dealias.scale_rows(&pw);
        for i in 0..n {
            for (x, y) in inner.row_mut(i).iter_mut().zip(second.row(i)) {
                *x += y;
            }
        }
        let convection = self.dealias.matmul(&inner);

        let d1w = self.d1.mul_vec(w);
        let d4w = self.d4.mul_vec(w);
        let mut jac = Matrix::zeros(n + 1, n + 2);
        for i in 0..n {
            let row = jac.row_mut(i);
            for j in 0..n {
                row[j] = -c * self.d1[(i, j)]
                    + convection[(i, j)]
                    + self.d2[(i, j)]
                    + lambda * self.d4[(i, j)];
            }
            row[i] -= a * w[i].cos();
            row[n] = -d1w[i];
            row[n + 1] = d4w[i];
        }
        jac.row_mut(n)[..n].copy_from_slice(&self.phase_row);
        Some(jac)
    }
}
