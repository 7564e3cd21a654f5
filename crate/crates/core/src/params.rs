use crate::{Error, Result};

/// Tuning parameters of a continuation run.
///
/// `h_init` is signed: its sign picks the initial orientation (λ increasing
/// for positive values), its magnitude the initial pseudo-arclength step.
#[derive(Clone, Debug, PartialEq)]
pub struct RunParams {
    pub n_dim: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_index: usize,
    pub delta_lambda: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub h_init: f64,
    pub max_iter: u32,
    pub tol_residual: f64,
    pub mu: f64,
    pub gamma: f64,
    /// Tree depth `D`.
    pub max_depth: usize,
    /// Tree width `W`.
    pub max_children: usize,
    /// Step multipliers `t_1..t_W`.
    pub scalings: Vec<f64>,
    pub verbose: u32,
    /// Number of corrector sequences that may be in flight at once.
    pub worker_budget: usize,
}

impl RunParams {
    /// Checks every invariant the engine relies on.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_dim < 2 {
            return fail(format!("N_DIM must be at least 2, got {}", self.n_dim));
        }
        if self.lambda_index >= self.n_dim {
            return fail(format!(
                "LAMBDA_INDEX {} out of range 0..{}",
                self.lambda_index,
                self.n_dim - 1
            ));
        }
        let finite = [
            ("LAMBDA_MIN", self.lambda_min),
            ("LAMBDA_MAX", self.lambda_max),
            ("DELTA_LAMBDA", self.delta_lambda),
            ("H_MIN", self.h_min),
            ("H_MAX", self.h_max),
            ("H_INIT", self.h_init),
            ("TOL_RESIDUAL", self.tol_residual),
            ("MU", self.mu),
            ("GAMMA", self.gamma),
        ];
        if let Some((key, _)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return fail(format!("{key} must be finite"));
        }
        if !(self.lambda_min < self.lambda_max) {
            return fail("LAMBDA_MIN must be below LAMBDA_MAX".into());
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_max) {
            return fail("need 0 < H_MIN <= H_MAX".into());
        }
        if self.h_init == 0.0 || self.h_init.abs() > self.h_max {
            return fail("need 0 < |H_INIT| <= H_MAX".into());
        }
        if self.delta_lambda == 0.0 {
            return fail("DELTA_LAMBDA must be nonzero".into());
        }
        if self.max_iter == 0 {
            return fail("MAX_ITER must be positive".into());
        }
        if !(self.tol_residual > 0.0) {
            return fail("TOL_RESIDUAL must be positive".into());
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return fail(format!("MU must lie in (0, 1), got {}", self.mu));
        }
        if !(self.gamma > 1.0) {
            return fail(format!("GAMMA must exceed 1, got {}", self.gamma));
        }
        if self.max_depth == 0 || self.max_children == 0 {
            return fail("MAX_DEPTH and MAX_CHILDREN must be positive".into());
        }
        if self.scalings.len() != self.max_children {
            return fail(format!(
                "MAX_CHILDREN is {} but {} SCALE_PROCESS_K values were given",
                self.max_children,
                self.scalings.len()
            ));
        }
        if self.scalings.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return fail("SCALE_PROCESS_K values must be positive".into());
        }
        if self.worker_budget == 0 {
            return fail("WORKER_BUDGET must be positive".into());
        }
        Ok(())
    }

    /// Factor applied to a node's base step when all of its children failed:
    /// `0.9 * t_min / t_max`.
    pub fn failure_reduction(&self) -> f64 {
        let t_min = self.scalings.iter().copied().fold(f64::INFINITY, f64::min);
        let t_max = self.scalings.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.9 * t_min / t_max
    }

    /// Scaling indices in ascending order of step multiplier (stable).
    pub fn scaling_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scalings.len()).collect();
        order.sort_by(|&a, &b| self.scalings[a].total_cmp(&self.scalings[b]));
        order
    }

    /// +1 when continuing toward increasing λ, -1 otherwise.
    pub fn orientation(&self) -> f64 {
        self.h_init.signum()
    }

    /// Whether `lambda` ends a run. The bound ahead (in the direction of
    /// `h_init`) is inclusive; the bound behind is strict so that a run may
    /// start on it and still stop after coming back through a fold.
    pub fn outside_interval(&self, lambda: f64) -> bool {
        if self.orientation() > 0.0 {
            lambda >= self.lambda_max || lambda < self.lambda_min
        } else {
            lambda <= self.lambda_min || lambda > self.lambda_max
        }
    }

    /// Parameters of the modified Kuramoto-Sivashinsky experiment
    /// (`n_grid` grid points, continuation toward decreasing λ).
    pub fn ks_table(n_grid: usize) -> Self {
        RunParams {
            n_dim: n_grid + 2,
            lambda_min: 0.001,
            lambda_max: 0.1828,
            lambda_index: n_grid + 1,
            delta_lambda: 1e-3,
            h_min: 1e-2,
            h_max: 2000.0,
            h_init: -100.0,
            max_iter: 4,
            tol_residual: 5e-7,
            mu: 0.5,
            gamma: 2.0,
            max_depth: 3,
            max_children: 3,
            scalings: vec![0.75, 1.0, 2.0],
            verbose: 0,
            worker_budget: 12,
        }
    }
}
