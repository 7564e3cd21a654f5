//! The coordinator loop: spawn predictions on free worker slots, run one
//! synchronized round of corrector steps, recolor, prune and advance the root.

use std::path::PathBuf;

use log::{debug, info};
use rayon::prelude::*;

use crate::io::dot::export_dot;
use crate::params::RunParams;
use crate::problem::{evaluate_residual, residual_norm, CurvePoint, Direction, Problem};
use crate::tree::{self, assign_color, secant_direction, Color, TreeNode};
use crate::{Error, Result};

/// Safety cap on the number of synchronized rounds.
pub const DEFAULT_ROUND_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminationReason {
    /// The root left the λ interval: through the target end, or back through
    /// the starting end after a fold.
    ReachedLambdaMax,
    /// The root's base step dropped below `h_min`.
    StepUnderflow,
    /// The round (or step) cap was hit.
    IterationBudget,
    /// A residual evaluation at the root failed.
    EvaluationFailure,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::ReachedLambdaMax => "REACHED_LAMBDA_MAX",
            TerminationReason::StepUnderflow => "STEP_UNDERFLOW",
            TerminationReason::IterationBudget => "ITERATION_BUDGET",
            TerminationReason::EvaluationFailure => "EVALUATION_FAILURE",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ContinuationResult {
    /// Accepted points in root-advance order.
    pub accepted_points: Vec<CurvePoint>,
    pub termination_reason: TerminationReason,
    pub rounds_executed: u64,
    pub corrector_steps_total: u64,
    /// Nodes deleted because they were colored BLACK (subtrees included).
    pub nodes_failed: u64,
}

/// Execution settings that do not affect results.
#[derive(Clone, Debug)]
pub struct EngineOptions {
    /// Threads backing the worker budget; `None` picks
    /// `min(worker_budget, available cores)`.
    pub threads: Option<usize>,
    pub round_cap: u64,
    /// Where `tree_<round>.dot` files go when `verbose >= 2`.
    pub dot_dir: Option<PathBuf>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { threads: None, round_cap: DEFAULT_ROUND_CAP, dot_dir: None }
    }
}

/// Validates the starting point and computes the initial direction.
///
/// A neighbor point is found by correcting at λ shifted by `delta_lambda`
/// (in the direction fixed by the sign of `h_init`); the returned direction
/// is the unit secant toward it.
pub fn bootstrap<P: Problem + ?Sized>(
    problem: &P,
    params: &RunParams,
    initial_point: &[f64],
) -> Result<(CurvePoint, Direction)> {
    let start = converged_start(problem, params, initial_point)?;
    if params.delta_lambda == 0.0 || !params.delta_lambda.is_finite() {
        return Err(Error::InvalidParams("DELTA_LAMBDA must be nonzero".into()));
    }
    let shift = params.orientation() * params.delta_lambda.abs();
    let axis = Direction::axis(problem.n_dim(), params.lambda_index);
    let mut zeta = axis.advance(&start.z, shift);
    for _ in 0..params.max_iter {
        zeta = problem
            .corrector_step(&zeta, &axis, &start.z, shift)
            .map_err(|e| Error::Bootstrap(format!("neighbor correction failed: {e}")))?;
        let norm = residual_norm(problem, &zeta)?;
        if norm <= params.tol_residual {
            let direction = Direction::secant(&start.z, &zeta)
                .ok_or_else(|| Error::Bootstrap("neighbor point coincides with start".into()))?;
            return Ok((start, direction));
        }
    }
    Err(Error::Bootstrap(format!(
        "neighbor point did not converge within {} corrector steps",
        params.max_iter
    )))
}

pub(crate) fn converged_start<P: Problem + ?Sized>(
    problem: &P,
    params: &RunParams,
    initial_point: &[f64],
) -> Result<CurvePoint> {
    if problem.n_dim() != params.n_dim {
        return Err(Error::Dimension { expected: params.n_dim, actual: problem.n_dim() });
    }
    if problem.lambda_index() != params.lambda_index {
        return Err(Error::InvalidParams(format!(
            "LAMBDA_INDEX {} does not match the problem's {}",
            params.lambda_index,
            problem.lambda_index()
        )));
    }
    let start = CurvePoint::evaluate(problem, initial_point.to_vec())?;
    if start.residual_norm > params.tol_residual {
        return Err(Error::UnconvergedStart { norm: start.residual_norm, tol: params.tol_residual });
    }
    Ok(start)
}

/// Flips `next` if it points backwards relative to `previous`.
pub(crate) fn align(next: Direction, previous: &Direction) -> Direction {
    let d: f64 = next.as_slice().iter().zip(previous.as_slice()).map(|(a, b)| a * b).sum();
    if d < 0.0 {
        next.negated()
    } else {
        next
    }
}

/// Seeds children below every leaf of depth `< max_depth`, breadth-first,
/// while worker slots remain. Returns the number of nodes spawned.
pub fn spawn_round(root: &mut TreeNode, root_tangent: &Direction, params: &RunParams) -> usize {
    let occupied = root.size() - 1;
    let mut budget = params.worker_budget.saturating_sub(occupied);
    let order = params.scaling_order();
    let mut spawned = 0;
    for (route, depth) in root.leaves_breadth_first() {
        if budget == 0 {
            break;
        }
        if depth >= params.max_depth {
            continue;
        }
        let leaf = root.descendant_mut(&route).expect("leaf route is valid");
        let direction = if route.is_empty() {
            root_tangent.clone()
        } else {
            secant_direction(leaf).unwrap_or_else(|| leaf.t_init.clone())
        };
        let mut steps: Vec<f64> = order
            .iter()
            .map(|&i| params.scalings[i] * leaf.h_base)
            .filter(|h| h.abs() <= params.h_max)
            .collect();
        if steps.is_empty() {
            // every multiplier overshoots the cap
            steps.push(params.h_max.copysign(leaf.h_base));
        }
        for h in steps.into_iter().take(budget) {
            let child = TreeNode::spawn(leaf.zeta.clone(), direction.clone(), h, leaf.nu);
            leaf.children.push(child);
            budget -= 1;
            spawned += 1;
        }
    }
    spawned
}

/// Counts from one corrector round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoundReport {
    pub steps: usize,
    pub step_failures: usize,
}

struct StepTask {
    zeta: Vec<f64>,
    tangent: Direction,
    z_base: Vec<f64>,
    h: f64,
}

/// One corrector step on every RED and YELLOW node, computed on `pool` and
/// applied in pre-order; touched nodes are recolored.
pub fn corrector_round<P: Problem + ?Sized>(
    root: &mut TreeNode,
    problem: &P,
    params: &RunParams,
    pool: &rayon::ThreadPool,
) -> RoundReport {
    let mut tasks = Vec::new();
    root.visit(&mut |node| {
        if node.color.is_active() {
            tasks.push(StepTask {
                zeta: node.zeta.clone(),
                tangent: node.t_init.clone(),
                z_base: node.z_init.clone(),
                h: node.h_init,
            });
        }
    });
    let results: Vec<Option<(Vec<f64>, f64)>> = pool.install(|| {
        tasks
            .par_iter()
            .with_max_len(1)
            .map(|t| {
                let next = problem.corrector_step(&t.zeta, &t.tangent, &t.z_base, t.h).ok()?;
                let r = evaluate_residual(problem, &next).ok()?;
                let norm = crate::linalg::norm2(&r);
                Some((next, norm))
            })
            .collect()
    });

    let mut report = RoundReport { steps: results.len(), step_failures: 0 };
    let mut results = results.into_iter();
    root.visit_mut(&mut |node| {
        if !node.color.is_active() {
            return;
        }
        match results.next().expect("one result per active node") {
            Some((zeta, norm)) => {
                node.record_step(zeta, norm);
                node.color = assign_color(node, params);
            }
            None => {
                node.nu += 1;
                node.color = Color::Black;
                report.step_failures += 1;
            }
        }
    });
    report
}

/// While the root has a single GREEN child, emits the root's point and
/// promotes the child. Stops early once the root has left the λ interval.
pub fn advance_root<P: Problem + ?Sized>(
    root: &mut TreeNode,
    root_tangent: &mut Direction,
    problem: &P,
    params: &RunParams,
    sink: &mut dyn FnMut(&CurvePoint) -> Result<()>,
) -> Result<usize> {
    let mut emitted = 0;
    while root.children.len() == 1 && root.children[0].color == Color::Green {
        if params.outside_interval(root.zeta[params.lambda_index]) && emitted > 0 {
            break;
        }
        let child = root.children.pop().expect("single child");
        let old = std::mem::replace(root, child);
        emit(problem, params, &old.zeta, sink)?;
        emitted += 1;
        let secant = Direction::secant(&old.zeta, &root.zeta).unwrap_or_else(|| root.t_init.clone());
        *root_tangent = align(secant, &root.t_init);
    }
    Ok(emitted)
}

fn emit<P: Problem + ?Sized>(
    problem: &P,
    params: &RunParams,
    z: &[f64],
    sink: &mut dyn FnMut(&CurvePoint) -> Result<()>,
) -> Result<()> {
    let point = CurvePoint::evaluate(problem, z.to_vec())?;
    if point.residual_norm > params.tol_residual {
        return Err(Error::Evaluation);
    }
    sink(&point)
}

/// Runs parallel adaptive pseudo-arclength continuation from `initial_point`.
///
/// Accepted points are passed to `sink` as soon as they are validated and are
/// also collected in the result.
pub fn run_continuation<P: Problem + ?Sized>(
    problem: &P,
    params: &RunParams,
    initial_point: &[f64],
    options: &EngineOptions,
    sink: &mut dyn FnMut(&CurvePoint) -> Result<()>,
) -> Result<ContinuationResult> {
    params.validate()?;
    let threads = options.threads.unwrap_or_else(|| {
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
        params.worker_budget.min(cores)
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let mut accepted = Vec::new();
    let mut record = |p: &CurvePoint| -> Result<()> {
        accepted.push(p.clone());
        sink(p)
    };

    if params.h_init.abs() < params.h_min {
        let start = converged_start(problem, params, initial_point)?;
        record(&start)?;
        return Ok(ContinuationResult {
            accepted_points: accepted,
            termination_reason: TerminationReason::StepUnderflow,
            rounds_executed: 0,
            corrector_steps_total: 0,
            nodes_failed: 0,
        });
    }

    let (start, mut root_tangent) = bootstrap(problem, params, initial_point)?;
    let mut root = TreeNode::root(start, root_tangent.clone(), params.h_init.abs());
    let mut rounds = 0u64;
    let mut steps = 0u64;
    let mut failed = 0u64;

    let reason = loop {
        let lambda = root.zeta[params.lambda_index];
        if params.outside_interval(lambda) {
            break TerminationReason::ReachedLambdaMax;
        }
        if root.h_base.abs() < params.h_min {
            break TerminationReason::StepUnderflow;
        }
        if rounds >= options.round_cap {
            break TerminationReason::IterationBudget;
        }

        let spawned = spawn_round(&mut root, &root_tangent, params);
        let round = corrector_round(&mut root, problem, params, &pool);
        rounds += 1;
        steps += round.steps as u64;

        if params.verbose >= 2 {
            if let Some(dir) = &options.dot_dir {
                export_dot(&root, rounds, dir, params.verbose)?;
            }
        }

        let pruned = tree::prune_tree(&mut root, params);
        failed += pruned.black_removed as u64;
        let reduced = tree::reduce_failed_base_steps(&mut root, &params.scalings);
        let emitted = match advance_root(&mut root, &mut root_tangent, problem, params, &mut record) {
            Ok(n) => n,
            Err(Error::Evaluation) => break TerminationReason::EvaluationFailure,
            Err(e) => return Err(e),
        };

        debug!(
            "round {rounds}: spawned {spawned}, steps {}, black {}, redundant {}, reduced {reduced}, emitted {emitted}, tree {}",
            round.steps,
            pruned.black_removed,
            pruned.redundant_removed,
            root.size()
        );
        if params.verbose >= 1 && emitted > 0 {
            info!(
                "round {rounds}: root at lambda = {:.8e}, h_base = {:.4e}, {emitted} emitted",
                root.zeta[params.lambda_index],
                root.h_base
            );
        }
    };

    // the final root is converged as well
    let reason = match emit(problem, params, &root.zeta, &mut record) {
        Ok(()) => reason,
        Err(Error::Evaluation) => TerminationReason::EvaluationFailure,
        Err(e) => return Err(e),
    };
    drop(record);

    Ok(ContinuationResult {
        accepted_points: accepted,
        termination_reason: reason,
        rounds_executed: rounds,
        corrector_steps_total: steps,
        nodes_failed: failed,
    })
}
