//! The continuation problem `F(z) = 0`, `F: R^N -> R^(N-1)`, and the default
//! bordered Newton corrector.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{self, dot, norm2, Matrix};
use crate::{Error, Result};

/// A point on (or near) the solution curve together with its residual norm.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub z: Vec<f64>,
    pub residual_norm: f64,
}

impl CurvePoint {
    /// Evaluates the residual at `z` and records its norm.
    pub fn evaluate<P: Problem + ?Sized>(problem: &P, z: Vec<f64>) -> Result<Self> {
        let residual_norm = residual_norm(problem, &z)?;
        Ok(CurvePoint { z, residual_norm })
    }

    pub fn lambda(&self, lambda_index: usize) -> f64 {
        self.z[lambda_index]
    }
}

/// Unit vector in `R^N` used for prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction(Vec<f64>);

/// Displacements shorter than this cannot be normalized into a direction.
pub const DEGENERATE_NORM: f64 = 1e-14;

impl Direction {
    /// Normalizes `v`; `None` when its norm is below `DEGENERATE_NORM` or not finite.
    pub fn new(mut v: Vec<f64>) -> Option<Self> {
        let n = norm2(&v);
        if !n.is_finite() || n < DEGENERATE_NORM {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= n);
        Some(Direction(v))
    }

    /// Unit direction along `to - from`.
    pub fn secant(from: &[f64], to: &[f64]) -> Option<Self> {
        Direction::new(to.iter().zip(from).map(|(b, a)| b - a).collect())
    }

    /// Unit coordinate vector `e_index` in `R^dim`.
    pub fn axis(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Direction(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        Direction(self.0.iter().map(|x| -x).collect())
    }

    /// `base + h * self`
    pub fn advance(&self, base: &[f64], h: f64) -> Vec<f64> {
        base.iter().zip(&self.0).map(|(b, t)| b + h * t).collect()
    }
}

/// Why a single corrector step could not be computed.
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
pub enum StepFailure {
    #[error("problem provides no Jacobian for the bordered Newton step")]
    NoJacobian,
    #[error("bordered system is singular")]
    Singular,
    #[error("non-finite values in corrector step")]
    NonFinite,
}

/// A continuation problem: `n_dim` unknowns, `n_dim - 1` equations.
///
/// Implementations are shared read-only between worker threads; residual and
/// corrector evaluations must be pure functions of their arguments.
pub trait Problem: Sync {
    fn n_dim(&self) -> usize;

    fn lambda_index(&self) -> usize;

    /// `F(z)`, of length `n_dim - 1`.
    fn residual(&self, z: &[f64]) -> Vec<f64>;

    /// `F_z(z)` as an `(n_dim - 1) x n_dim` matrix, when available.
    fn jacobian(&self, _z: &[f64]) -> Option<Matrix> {
        None
    }

    /// One corrector iteration toward the curve on the hyperplane
    /// `T . (zeta - z_base) = h`.
    fn corrector_step(
        &self,
        zeta: &[f64],
        tangent: &Direction,
        z_base: &[f64],
        h: f64,
    ) -> Result<Vec<f64>, StepFailure> {
        bordered_newton_step(self, zeta, tangent, z_base, h)
    }
}

impl<P: Problem + ?Sized> Problem for &P {
    fn n_dim(&self) -> usize {
        (**self).n_dim()
    }
    fn lambda_index(&self) -> usize {
        (**self).lambda_index()
    }
    fn residual(&self, z: &[f64]) -> Vec<f64> {
        (**self).residual(z)
    }
    fn jacobian(&self, z: &[f64]) -> Option<Matrix> {
        (**self).jacobian(z)
    }
    fn corrector_step(
        &self,
        zeta: &[f64],
        tangent: &Direction,
        z_base: &[f64],
        h: f64,
    ) -> Result<Vec<f64>, StepFailure> {
        (**self).corrector_step(zeta, tangent, z_base, h)
    }
}

type ResidualFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacobianFn = dyn Fn(&[f64]) -> Matrix + Send + Sync;
type StepperFn =
    dyn Fn(&[f64], &Direction, &[f64], f64) -> Result<Vec<f64>, StepFailure> + Send + Sync;

/// A problem assembled from closures: the plug-in route for user problems.
#[derive(Clone)]
pub struct ProblemDefinition {
    n_dim: usize,
    lambda_index: usize,
    residual: Arc<ResidualFn>,
    jacobian: Option<Arc<JacobianFn>>,
    stepper: Option<Arc<StepperFn>>,
}

impl ProblemDefinition {
    pub fn new(
        n_dim: usize,
        lambda_index: usize,
        residual: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if n_dim < 2 {
            return Err(Error::Config(format!("n_dim must be at least 2, got {n_dim}")));
        }
        if lambda_index >= n_dim {
            return Err(Error::Config(format!(
                "lambda_index {lambda_index} out of range for n_dim {n_dim}"
            )));
        }
        Ok(ProblemDefinition {
            n_dim,
            lambda_index,
            residual: Arc::new(residual),
            jacobian: None,
            stepper: None,
        })
    }

    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// Replaces the default bordered Newton step with a custom corrector.
    pub fn with_corrector(
        mut self,
        stepper: impl Fn(&[f64], &Direction, &[f64], f64) -> Result<Vec<f64>, StepFailure>
            + Send
            + Sync
            + 'static,
    ) -> Self {
        self.stepper = Some(Arc::new(stepper));
        self
    }
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("n_dim", &self.n_dim)
            .field("lambda_index", &self.lambda_index)
            .field("jacobian", &self.jacobian.is_some())
            .field("custom_corrector", &self.stepper.is_some())
            .finish()
    }
}

impl Problem for ProblemDefinition {
    fn n_dim(&self) -> usize {
        self.n_dim
    }

    fn lambda_index(&self) -> usize {
        self.lambda_index
    }

    fn residual(&self, z: &[f64]) -> Vec<f64> {
        (self.residual)(z)
    }

    fn jacobian(&self, z: &[f64]) -> Option<Matrix> {
        self.jacobian.as_ref().map(|j| j(z))
    }

    fn corrector_step(
        &self,
        zeta: &[f64],
        tangent: &Direction,
        z_base: &[f64],
        h: f64,
    ) -> Result<Vec<f64>, StepFailure> {
        match &self.stepper {
            Some(step) => step(zeta, tangent, z_base, h),
            None => bordered_newton_step(self, zeta, tangent, z_base, h),
        }
    }
}

/// `F(z)` with the dimension and finiteness contract checked.
pub fn evaluate_residual<P: Problem + ?Sized>(problem: &P, z: &[f64]) -> Result<Vec<f64>> {
    if z.len() != problem.n_dim() {
        return Err(Error::Dimension { expected: problem.n_dim(), actual: z.len() });
    }
    let r = problem.residual(z);
    if r.len() != problem.n_dim() - 1 {
        return Err(Error::Dimension { expected: problem.n_dim() - 1, actual: r.len() });
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Evaluation);
    }
    Ok(r)
}

pub fn residual_norm<P: Problem + ?Sized>(problem: &P, z: &[f64]) -> Result<f64> {
    evaluate_residual(problem, z).map(|r| norm2(&r))
}

/// One Newton step on the square system `[F(zeta); T . (zeta - z_base) - h] = 0`.
pub fn bordered_newton_step<P: Problem + ?Sized>(
    problem: &P,
    zeta: &[f64],
    tangent: &Direction,
    z_base: &[f64],
    h: f64,
) -> Result<Vec<f64>, StepFailure> {
    let n = problem.n_dim();
    assert_eq!(zeta.len(), n, "corrector iterate has wrong dimension");
    let jac = problem.jacobian(zeta).ok_or(StepFailure::NoJacobian)?;
    assert_eq!((jac.rows(), jac.cols()), (n - 1, n), "Jacobian has wrong shape");
    let r = problem.residual(zeta);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(StepFailure::NonFinite);
    }

    let t = tangent.as_slice();
    let mut bordered = Matrix::zeros(n, n);
    for i in 0..n - 1 {
        bordered.row_mut(i).copy_from_slice(jac.row(i));
    }
    bordered.row_mut(n - 1).copy_from_slice(t);

    let offset: Vec<f64> = zeta.iter().zip(z_base).map(|(a, b)| a - b).collect();
    let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
    rhs.push(h - dot(t, &offset));

    let delta = linalg::solve(bordered, &rhs).map_err(|_| StepFailure::Singular)?;
    let next: Vec<f64> = zeta.iter().zip(&delta).map(|(a, d)| a + d).collect();
    if next.iter().all(|v| v.is_finite()) {
        Ok(next)
    } else {
        Err(StepFailure::NonFinite)
    }
}

/// Central-difference approximation of `F_z`, column by column.
pub fn central_difference_jacobian<P: Problem + ?Sized>(problem: &P, z: &[f64], eps: f64) -> Matrix {
    let n = problem.n_dim();
    let mut jac = Matrix::zeros(n - 1, n);
    let mut zp = z.to_vec();
    for j in 0..n {
        let step = eps * z[j].abs().max(1.0);
        zp[j] = z[j] + step;
        let fp = problem.residual(&zp);
        zp[j] = z[j] - step;
        let fm = problem.residual(&zp);
        zp[j] = z[j];
        for i in 0..n - 1 {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    jac
}
