//! Single-threaded reference algorithms: natural continuation in λ and
//! serial pseudo-arclength continuation. Both use the problem's corrector and
//! the node coloring rules to decide convergence and failure.

use crate::engine::{align, bootstrap, converged_start, TerminationReason};
use crate::params::RunParams;
use crate::problem::{CurvePoint, Direction, Problem};
use crate::tree::{assign_color, Color, TreeNode};
use crate::Result;

/// Outcome of a sequential run.
#[derive(Clone, Debug)]
pub struct SerialTrace {
    pub accepted_points: Vec<CurvePoint>,
    pub corrector_steps_total: u64,
    pub failed_predictors: u64,
    pub termination_reason: TerminationReason,
}

/// Step adaptation for [`serial_pac`]: `h <- min(h * growth, h_max)` after an
/// accepted point, `h <- h * shrink` after a failed corrector sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub growth: f64,
    pub shrink: f64,
    /// Cap on the total number of predictions.
    pub max_predictions: u64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { growth: 2.0, shrink: 0.5, max_predictions: 1_000_000 }
    }
}

impl StepControl {
    /// No growth; failures reduce the step as the parallel engine does with a
    /// single scaling.
    pub fn fixed() -> Self {
        StepControl { growth: 1.0, shrink: 0.9, ..StepControl::default() }
    }
}

/// Runs one corrector sequence from `node` until it is GREEN or BLACK.
/// Returns whether it converged and the number of steps taken.
fn correct<P: Problem + ?Sized>(problem: &P, params: &RunParams, node: &mut TreeNode) -> (bool, u64) {
    let mut steps = 0;
    loop {
        steps += 1;
        let next = problem
            .corrector_step(&node.zeta, &node.t_init, &node.z_init, node.h_init)
            .ok()
            .and_then(|z| crate::problem::residual_norm(problem, &z).ok().map(|r| (z, r)));
        match next {
            Some((z, r)) => {
                node.record_step(z, r);
                node.color = assign_color(node, params);
            }
            None => node.color = Color::Black,
        }
        match node.color {
            Color::Green => return (true, steps),
            Color::Black => return (false, steps),
            _ => {}
        }
    }
}

/// Natural continuation: λ is advanced by `h` and the other unknowns are
/// corrected at fixed λ; `h` halves on failure.
pub fn natural_continuation<P: Problem + ?Sized>(
    problem: &P,
    params: &RunParams,
    initial_point: &[f64],
) -> Result<SerialTrace> {
    params.validate()?;
    let start = converged_start(problem, params, initial_point)?;
    let axis = Direction::axis(problem.n_dim(), params.lambda_index);
    let mut h = params.h_init;
    let mut current = start.z.clone();
    let mut trace = SerialTrace {
        accepted_points: vec![start],
        corrector_steps_total: 0,
        failed_predictors: 0,
        termination_reason: TerminationReason::IterationBudget,
    };
    let cap = StepControl::default().max_predictions;
    let mut predictions = 0;
    trace.termination_reason = loop {
        if params.outside_interval(current[params.lambda_index]) {
            break TerminationReason::ReachedLambdaMax;
        }
        if h.abs() < params.h_min {
            break TerminationReason::StepUnderflow;
        }
        if predictions >= cap {
            break TerminationReason::IterationBudget;
        }
        predictions += 1;
        let mut node = TreeNode::spawn(current.clone(), axis.clone(), h, 0);
        let (ok, steps) = correct(problem, params, &mut node);
        trace.corrector_steps_total += steps;
        if ok {
            match CurvePoint::evaluate(problem, node.zeta.clone()) {
                Ok(p) => trace.accepted_points.push(p),
                Err(_) => break TerminationReason::EvaluationFailure,
            }
            current = node.zeta;
        } else {
            trace.failed_predictors += 1;
            h *= 0.5;
        }
    };
    Ok(trace)
}

/// Sequential pseudo-arclength continuation with secant predictors.
pub fn serial_pac<P: Problem + ?Sized>(
    problem: &P,
    params: &RunParams,
    initial_point: &[f64],
    control: StepControl,
) -> Result<SerialTrace> {
    params.validate()?;
    let mut trace = SerialTrace {
        accepted_points: Vec::new(),
        corrector_steps_total: 0,
        failed_predictors: 0,
        termination_reason: TerminationReason::StepUnderflow,
    };
    if params.h_init.abs() < params.h_min {
        trace.accepted_points.push(converged_start(problem, params, initial_point)?);
        return Ok(trace);
    }
    let (start, mut tangent) = bootstrap(problem, params, initial_point)?;
    let mut current = start.z.clone();
    trace.accepted_points.push(start);
    let mut h = params.h_init.abs();
    let mut predictions = 0;
    trace.termination_reason = loop {
        if params.outside_interval(current[params.lambda_index]) {
            break TerminationReason::ReachedLambdaMax;
        }
        if h < params.h_min {
            break TerminationReason::StepUnderflow;
        }
        if predictions >= control.max_predictions {
            break TerminationReason::IterationBudget;
        }
        predictions += 1;
        let mut node = TreeNode::spawn(current.clone(), tangent.clone(), h, 0);
        let (ok, steps) = correct(problem, params, &mut node);
        trace.corrector_steps_total += steps;
        if ok {
            match CurvePoint::evaluate(problem, node.zeta.clone()) {
                Ok(p) => trace.accepted_points.push(p),
                Err(_) => break TerminationReason::EvaluationFailure,
            }
            let secant = Direction::secant(&current, &node.zeta).unwrap_or_else(|| tangent.clone());
            tangent = align(secant, &tangent);
            current = node.zeta;
            h = (h * control.growth).min(params.h_max);
        } else {
            trace.failed_predictors += 1;
            h *= control.shrink;
        }
    };
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemDefinition;
    use crate::linalg::Matrix;
    use crate::problems::circle_problem;

    fn params() -> RunParams {
        RunParams {
            n_dim: 2,
            lambda_min: 0.0,
            lambda_max: 1.0,
            lambda_index: 1,
            delta_lambda: 0.05,
            h_min: 1e-8,
            h_max: 0.5,
            h_init: 0.25,
            max_iter: 4,
            tol_residual: 1e-10,
            mu: 0.5,
            gamma: 2.0,
            max_depth: 2,
            max_children: 3,
            scalings: vec![0.75, 1.0, 2.0],
            verbose: 0,
            worker_budget: 12,
        }
    }

    #[test]
    fn natural_on_linear_problem() {
        let p = ProblemDefinition::new(2, 1, |z| vec![z[0] - z[1]])
            .unwrap()
            .with_jacobian(|_| Matrix::from_row_major(1, 2, vec![1.0, -1.0]));
        let trace = natural_continuation(&p, &params(), &[0.0, 0.0]).unwrap();
        assert_eq!(trace.termination_reason, TerminationReason::ReachedLambdaMax);
        assert_eq!(trace.accepted_points.len(), 5);
        assert_eq!(trace.failed_predictors, 0);
        for (k, pt) in trace.accepted_points.iter().enumerate() {
            assert_eq!(pt.z[1], 0.25 * k as f64);
            assert!((pt.z[0] - pt.z[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn natural_stalls_at_fold() {
        let mut prm = params();
        prm.h_init = 0.1;
        prm.lambda_max = 2.0;
        let trace = natural_continuation(&circle_problem(), &prm, &[1.0, 0.0]).unwrap();
        assert_eq!(trace.termination_reason, TerminationReason::StepUnderflow);
        let last = trace.accepted_points.last().unwrap();
        // halved steps are binary-exact here, so the last point sits on the
        // fold itself (x ~ 1e-5 is within tolerance); it never gets past it
        assert!(last.z[1] <= 1.0 && last.z[1] > 0.99);
        assert!(trace.accepted_points.iter().all(|p| p.z[0] > 0.0));
        assert!(trace.failed_predictors > 0);
    }

    #[test]
    fn serial_pac_passes_fold() {
        let mut prm = params();
        prm.h_init = 0.1;
        prm.lambda_max = 2.0;
        let trace = serial_pac(&circle_problem(), &prm, &[1.0, 0.0], StepControl::default()).unwrap();
        assert_eq!(trace.termination_reason, TerminationReason::ReachedLambdaMax);
        let last = trace.accepted_points.last().unwrap();
        assert!(last.z[0] < -0.9 && last.z[1] < 0.0);
        for pt in &trace.accepted_points {
            assert!(pt.residual_norm <= 1e-10);
        }
    }

    #[test]
    fn unconverged_start_is_rejected() {
        assert!(natural_continuation(&circle_problem(), &params(), &[1.0, 0.3]).is_err());
        assert!(serial_pac(&circle_problem(), &params(), &[1.0, 0.3], StepControl::default()).is_err());
    }
}
