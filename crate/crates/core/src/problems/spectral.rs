//! Fourier pseudo-spectral operators on the periodic grid `x_j = 2πj/n`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::linalg::Matrix;

#[derive(Clone)]
pub struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Wavenumber of each FFT bin, `0, 1, .., n/2 - 1, -n/2, .., -1`.
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let wavenumbers = (0..n)
            .map(|j| if j < n / 2 { j as f64 } else { j as f64 - n as f64 })
            .collect();
        Spectral {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            wavenumbers,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|j| 2.0 * std::f64::consts::PI * j as f64 / self.n as f64).collect()
    }

    /// Fourier coefficients `a_k` with `w_j = Σ a_k e^{i k x_j}`.
    pub fn to_coefficients(&self, w: &[f64]) -> Vec<Complex64> {
        assert_eq!(w.len(), self.n);
        let mut buf: Vec<Complex64> = w.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|a| *a *= scale);
        buf
    }

    /// Real part of the inverse transform of `coefficients`.
    pub fn to_grid(&self, coefficients: &[Complex64]) -> Vec<f64> {
        assert_eq!(coefficients.len(), self.n);
        let mut buf = coefficients.to_vec();
        self.inverse.process(&mut buf);
        buf.iter().map(|a| a.re).collect()
    }

    /// Multiplier of `d^p/dx^p` for bin `j`. The Nyquist bin is dropped for
    /// odd `p` so real input stays real.
    fn symbol(&self, j: usize, p: u32) -> Complex64 {
        if p % 2 == 1 && 2 * j == self.n {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.wavenumbers[j]).powu(p)
    }

    pub fn derivative(&self, w: &[f64], p: u32) -> Vec<f64> {
        let mut a = self.to_coefficients(w);
        for (j, c) in a.iter_mut().enumerate() {
            *c *= self.symbol(j, p);
        }
        self.to_grid(&a)
    }

    /// 2/3-rule projection: keeps modes with `|k| < n/3`.
    pub fn dealias(&self, w: &[f64]) -> Vec<f64> {
        let mut a = self.to_coefficients(w);
        let cutoff = self.n as f64 / 3.0;
        for (c, k) in a.iter_mut().zip(&self.wavenumbers) {
            if k.abs() >= cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        self.to_grid(&a)
    }

    /// Dense matrix of a linear grid operator, built column by column.
    pub fn operator_matrix(&self, op: impl Fn(&[f64]) -> Vec<f64>) -> Matrix {
        let n = self.n;
        let mut m = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = op(&e);
            for (i, v) in col.into_iter().enumerate() {
                m[(i, j)] = v;
            }
            e[j] = 0.0;
        }
        m
    }

    pub fn derivative_matrix(&self, p: u32) -> Matrix {
        self.operator_matrix(|e| self.derivative(e, p))
    }

    pub fn dealias_matrix(&self) -> Matrix {
        self.operator_matrix(|e| self.dealias(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn derivative_of_sine_is_cosine() {
        let s = Spectral::new(16);
        let w: Vec<f64> = s.grid().iter().map(|x| x.sin()).collect();
        let dw = s.derivative(&w, 1);
        for (x, d) in s.grid().iter().zip(&dw) {
            assert_abs_diff_eq!(*d, x.cos(), epsilon = 1e-14);
        }
        let d4 = s.derivative(&w, 4);
        for (v, d) in w.iter().zip(&d4) {
            assert_abs_diff_eq!(*d, *v, epsilon = 1e-12);
        }
    }

    #[test]
    fn dealias_removes_high_modes() {
        let s = Spectral::new(12);
        let w: Vec<f64> = s.grid().iter().map(|x| x.cos() + (4.0 * x).cos()).collect();
        let p = s.dealias(&w);
        for (x, v) in s.grid().iter().zip(&p) {
            assert_abs_diff_eq!(*v, x.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn matrices_agree_with_transforms() {
        let s = Spectral::new(16);
        let w: Vec<f64> = s.grid().iter().map(|x| (x.sin() * 2.0).exp()).collect();
        let d1 = s.derivative_matrix(1);
        for (a, b) in d1.mul_vec(&w).iter().zip(s.derivative(&w, 1)) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip_is_identity(log_n in 4u32..=9, seed in proptest::collection::vec(-10.0f64..10.0, 512)) {
            let n = 1usize << log_n;
            let s = Spectral::new(n);
            let w = &seed[..n];
            let back = s.to_grid(&s.to_coefficients(w));
            for (a, b) in w.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn derivative_is_skew(log_n in 4u32..=8, seed in proptest::collection::vec(-1.0f64..1.0, 512)) {
            let n = 1usize << log_n;
            let s = Spectral::new(n);
            let (w, v) = (&seed[..n], &seed[256..256 + n]);
            let lhs: f64 = w.iter().zip(s.derivative(v, 1)).map(|(a, b)| a * b).sum();
            let rhs: f64 = s.derivative(w, 1).iter().zip(v).map(|(a, b)| a * b).sum();
            prop_assert!((lhs + rhs).abs() <= 1e-10);
        }
    }
}
