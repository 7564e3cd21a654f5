//! The computation tree of speculative corrector sequences.
//!
//! Each node is one predictor-corrector sequence seeded from its parent's
//! current iterate. Nodes are colored from their residual history, and the
//! tree is pruned in two stages: subtrees rooted at BLACK nodes are dropped,
//! then below every node only the GREEN/YELLOW child on the path with the best
//! expected progress rate survives (RED children are always kept).

use std::collections::VecDeque;
use std::fmt;

use crate::params::RunParams;
use crate::problem::{CurvePoint, Direction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Color {
    /// Converged.
    Green,
    /// Expected to converge with the next corrector step.
    Yellow,
    /// Undecided.
    Red,
    /// Diverging, stagnating or over the iteration budget.
    Black,
}

impl Color {
    pub fn name(self) -> &'static str {
        match self {
            Color::Green => "green",
            Color::Yellow => "yellow",
            Color::Red => "red",
            Color::Black => "black",
        }
    }

    pub fn is_viable(self) -> bool {
        matches!(self, Color::Green | Color::Yellow)
    }

    /// Whether nodes of this color receive corrector steps.
    pub fn is_active(self) -> bool {
        matches!(self, Color::Red | Color::Yellow)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One corrector sequence and the subtree of predictions seeded from it.
#[derive(Clone, Debug)]
pub struct TreeNode {
    /// Current iterate.
    pub zeta: Vec<f64>,
    /// Corrector steps computed by this node.
    pub nu: u32,
    /// Parent's step count when this node was spawned.
    pub nu_init: u32,
    pub z_init: Vec<f64>,
    pub t_init: Direction,
    /// Step length of the prediction that seeded this node.
    pub h_init: f64,
    /// Base step used to size predictions for this node's children.
    pub h_base: f64,
    pub color: Color,
    /// Norm of the residual at `zeta`; infinite until the first evaluation.
    pub residual_norm: f64,
    /// Residual norm before the latest corrector step; `None` iff `nu == 0`.
    pub residual_norm_previous: Option<f64>,
    /// Ordered by ascending step multiplier.
    pub children: Vec<TreeNode>,
    children_failed: bool,
}

impl TreeNode {
    /// A fresh RED node predicted at `z_init + h_init * t_init`.
    pub fn spawn(z_init: Vec<f64>, t_init: Direction, h_init: f64, nu_init: u32) -> Self {
        let zeta = t_init.advance(&z_init, h_init);
        TreeNode {
            zeta,
            nu: 0,
            nu_init,
            z_init,
            t_init,
            h_init,
            h_base: h_init,
            color: Color::Red,
            residual_norm: f64::INFINITY,
            residual_norm_previous: None,
            children: Vec::new(),
            children_failed: false,
        }
    }

    /// A converged GREEN root at `point`, spawning with base step `h_base`.
    pub fn root(point: CurvePoint, tangent: Direction, h_base: f64) -> Self {
        TreeNode {
            z_init: point.z.clone(),
            zeta: point.z,
            nu: 0,
            nu_init: 0,
            t_init: tangent,
            h_init: 0.0,
            h_base,
            color: Color::Green,
            residual_norm: point.residual_norm,
            residual_norm_previous: None,
            children: Vec::new(),
            children_failed: false,
        }
    }

    /// Records one corrector step with its new residual norm.
    pub fn record_step(&mut self, zeta: Vec<f64>, residual_norm: f64) {
        self.zeta = zeta;
        self.residual_norm_previous = Some(self.residual_norm);
        self.residual_norm = residual_norm;
        self.nu += 1;
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of nodes in this subtree, including `self`.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TreeNode::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&TreeNode)) {
        f(self);
        for child in &self.children {
            child.visit(f);
        }
    }

    /// Pre-order traversal with mutable access.
    pub fn visit_mut(&mut self, f: &mut impl FnMut(&mut TreeNode)) {
        f(self);
        for child in &mut self.children {
            child.visit_mut(f);
        }
    }

    /// Follows child indices from this node.
    pub fn descendant(&self, route: &[usize]) -> Option<&TreeNode> {
        route.iter().try_fold(self, |node, &i| node.children.get(i))
    }

    pub fn descendant_mut(&mut self, route: &[usize]) -> Option<&mut TreeNode> {
        route.iter().try_fold(self, |node, &i| node.children.get_mut(i))
    }

    /// Routes to all leaves in breadth-first order, with their depths.
    pub fn leaves_breadth_first(&self) -> Vec<(Vec<usize>, usize)> {
        let mut leaves = Vec::new();
        let mut queue = VecDeque::from([(Vec::new(), self)]);
        while let Some((route, node)) = queue.pop_front() {
            if node.is_leaf() {
                let depth = route.len();
                leaves.push((route, depth));
                continue;
            }
            for (i, child) in node.children.iter().enumerate() {
                let mut r = route.clone();
                r.push(i);
                queue.push_back((r, child));
            }
        }
        leaves
    }
}

/// Color rules, applied in order: GREEN, YELLOW, BLACK, RED.
pub fn assign_color(node: &TreeNode, params: &RunParams) -> Color {
    let r = node.residual_norm;
    if !r.is_finite() {
        return Color::Black;
    }
    if r <= params.tol_residual {
        return Color::Green;
    }
    if r.powf(params.gamma) <= params.tol_residual {
        return Color::Yellow;
    }
    let over_budget = node.nu > params.max_iter;
    let stalled = match node.residual_norm_previous {
        Some(prev) if node.nu >= 1 => r > params.mu * prev,
        _ => false,
    };
    if over_budget || stalled {
        Color::Black
    } else {
        Color::Red
    }
}

/// Unit secant from the node's seed point to its current iterate, or `None`
/// when the displacement is degenerate.
pub fn secant_direction(node: &TreeNode) -> Option<Direction> {
    Direction::secant(&node.z_init, &node.zeta)
}

/// A chain of nodes descending from some start node.
#[derive(Clone, Debug, PartialEq)]
pub struct PathMetrics {
    /// Initialization length: sum of |h_init| along the path.
    pub length: f64,
    /// Iteration cost needed to realize the whole path.
    pub cost: u32,
    /// Child indices leading from the start node to the path's leaf.
    pub route: Vec<usize>,
}

impl PathMetrics {
    /// The nodes of the path, starting with `start`.
    pub fn nodes<'a>(&self, start: &'a TreeNode) -> Vec<&'a TreeNode> {
        let mut out = vec![start];
        let mut node = start;
        for &i in &self.route {
            node = &node.children[i];
            out.push(node);
        }
        out
    }

    fn rate(&self, extra_cost: u32) -> f64 {
        let denom = self.cost + extra_cost;
        if denom == 0 {
            if self.length > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            self.length / f64::from(denom)
        }
    }

    /// Estimated progress per corrector round if this path is confirmed valid.
    pub fn valid_rate(&self) -> f64 {
        self.rate(0)
    }

    /// Estimated progress per corrector round for a viable path, which needs
    /// one more step to converge.
    pub fn viable_rate(&self) -> f64 {
        self.rate(1)
    }
}

/// Longest valid (all GREEN) and viable (GREEN or YELLOW) paths from a node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodePaths {
    pub valid: Option<PathMetrics>,
    pub viable: Option<PathMetrics>,
}

/// Path metrics for every node of a subtree, mirroring its shape.
#[derive(Clone, Debug)]
pub struct PathTree {
    pub paths: NodePaths,
    pub children: Vec<PathTree>,
}

impl PathTree {
    pub fn build(node: &TreeNode) -> Self {
        let children: Vec<PathTree> = node.children.iter().map(PathTree::build).collect();
        let extend = |pick: fn(&NodePaths) -> Option<&PathMetrics>| {
            let mut best: Option<(usize, &PathMetrics)> = None;
            for (i, sub) in children.iter().enumerate() {
                if let Some(p) = pick(&sub.paths) {
                    if best.map_or(true, |(_, b)| p.length > b.length) {
                        best = Some((i, p));
                    }
                }
            }
            let own = node.h_init.abs();
            match best {
                None => PathMetrics { length: own, cost: node.nu, route: Vec::new() },
                Some((i, p)) => {
                    let mut route = Vec::with_capacity(p.route.len() + 1);
                    route.push(i);
                    route.extend_from_slice(&p.route);
                    PathMetrics {
                        length: own + p.length,
                        cost: node.nu.max(p.cost + node.children[i].nu_init),
                        route,
                    }
                }
            }
        };
        let paths = NodePaths {
            valid: (node.color == Color::Green).then(|| extend(|p| p.valid.as_ref())),
            viable: node.color.is_viable().then(|| extend(|p| p.viable.as_ref())),
        };
        PathTree { paths, children }
    }
}

/// Longest valid and viable paths rooted at `node`.
pub fn compute_paths(node: &TreeNode) -> NodePaths {
    PathTree::build(node).paths
}

/// Keeps the valid path unless the viable one promises a strictly better
/// rate of progress; zero-cost paths with positive length rank first.
pub fn choose_best_path<'a>(valid: &'a PathMetrics, viable: &'a PathMetrics) -> &'a PathMetrics {
    if valid.valid_rate() >= viable.viable_rate() {
        valid
    } else {
        viable
    }
}

// A valid path that ends at the node itself keeps no child, so it never
// displaces a viable path that continues.
fn best_path(paths: &NodePaths) -> Option<&PathMetrics> {
    let viable = paths.viable.as_ref()?;
    match &paths.valid {
        Some(valid) if !valid.route.is_empty() && valid.route != viable.route => {
            Some(choose_best_path(valid, viable))
        }
        _ => Some(viable),
    }
}

/// Number of nodes removed by each pruning stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PruneReport {
    pub black_removed: usize,
    pub redundant_removed: usize,
}

/// Two-stage pruning. Nodes that lose all of their children to the first
/// stage are flagged for [`reduce_failed_base_steps`].
pub fn prune_tree(root: &mut TreeNode, _params: &RunParams) -> PruneReport {
    let black_removed = remove_black_subtrees(root);
    let paths = PathTree::build(root);
    let redundant_removed = remove_redundant(root, &paths);
    PruneReport { black_removed, redundant_removed }
}

/// First pruning stage: deletes every subtree rooted at a BLACK node and
/// returns the number of nodes removed.
pub fn remove_black_subtrees(node: &mut TreeNode) -> usize {
    let had_children = !node.children.is_empty();
    let mut removed = 0;
    node.children.retain(|c| {
        if c.color == Color::Black {
            removed += c.size();
            false
        } else {
            true
        }
    });
    node.children_failed = had_children && node.children.is_empty();
    for child in &mut node.children {
        removed += remove_black_subtrees(child);
    }
    removed
}

// Post-order: smaller subtrees decide first, using metrics computed before
// any stage-two deletion.
fn remove_redundant(node: &mut TreeNode, paths: &PathTree) -> usize {
    let mut removed = 0;
    for (child, sub) in node.children.iter_mut().zip(&paths.children) {
        removed += remove_redundant(child, sub);
    }
    let keep = best_path(&paths.paths).and_then(|p| p.route.first().copied());
    let mut index = 0;
    node.children.retain(|c| {
        let on_best = keep == Some(index);
        index += 1;
        if c.color.is_viable() && !on_best {
            removed += c.size();
            false
        } else {
            true
        }
    });
    removed
}

/// `h_base <- 0.9 * t_min / t_max * h_base`, after all children of `node` failed.
pub fn reduce_base_step(node: &mut TreeNode, scalings: &[f64]) {
    let t_min = scalings.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = scalings.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    node.h_base *= 0.9 * t_min / t_max;
}

/// Applies [`reduce_base_step`] to every node flagged by the last pruning.
/// Returns how many nodes were reduced.
pub fn reduce_failed_base_steps(root: &mut TreeNode, scalings: &[f64]) -> usize {
    let mut count = 0;
    root.visit_mut(&mut |node| {
        if std::mem::take(&mut node.children_failed) {
            reduce_base_step(node, scalings);
            count += 1;
        }
    });
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> RunParams {
        RunParams {
            n_dim: 2,
            lambda_min: 0.0,
            lambda_max: 1.0,
            lambda_index: 1,
            delta_lambda: 0.01,
            h_min: 1e-2,
            h_max: 2000.0,
            h_init: 100.0,
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

    fn node(color: Color, h_init: f64, nu: u32, nu_init: u32) -> TreeNode {
        let mut n = TreeNode::spawn(vec![0.0, 0.0], Direction::axis(2, 1), h_init, nu_init);
        n.color = color;
        n.nu = nu;
        n
    }

    fn with_residuals(nu: u32, r: f64, prev: Option<f64>) -> TreeNode {
        let mut n = node(Color::Red, 1.0, nu, 0);
        n.residual_norm = r;
        n.residual_norm_previous = prev;
        n
    }

    #[test]
    fn spawn_invariants() {
        let t = Direction::new(vec![3.0, 4.0]).unwrap();
        let n = TreeNode::spawn(vec![1.0, 1.0], t, 5.0, 2);
        assert_eq!(n.zeta, vec![4.0, 5.0]);
        assert_eq!((n.nu, n.nu_init, n.color), (0, 2, Color::Red));
        assert!(n.residual_norm_previous.is_none());
        assert_eq!(n.h_base, 5.0);
    }

    #[test]
    fn color_examples() {
        let p = params();
        assert_eq!(assign_color(&with_residuals(3, 0.0, Some(1.0)), &p), Color::Green);
        assert_eq!(assign_color(&with_residuals(1, 1e-4, Some(1e-2)), &p), Color::Yellow);
        assert_eq!(assign_color(&with_residuals(2, 6e-3, Some(1e-2)), &p), Color::Black);
        assert_eq!(assign_color(&with_residuals(5, 1e-3, Some(1e-2)), &p), Color::Black);
        assert_eq!(assign_color(&with_residuals(2, 4e-3, Some(1e-2)), &p), Color::Red);
        assert_eq!(assign_color(&with_residuals(1, f64::NAN, Some(1e-2)), &p), Color::Black);
    }

    #[test]
    fn yellow_beats_black() {
        // Residual growth, but already close enough to converge next step.
        let p = params();
        assert_eq!(assign_color(&with_residuals(6, 1e-4, Some(1e-5)), &p), Color::Yellow);
    }

    #[test]
    fn no_growth_test_without_history() {
        let p = params();
        assert_eq!(assign_color(&with_residuals(0, 10.0, None), &p), Color::Red);
    }

    #[test]
    fn secant_examples() {
        let mut n = node(Color::Red, 1.0, 1, 0);
        n.z_init = vec![0.0, 0.0];
        n.zeta = vec![3.0, 4.0];
        assert_eq!(secant_direction(&n).unwrap().as_slice(), &[0.6, 0.8]);
        n.z_init = vec![1.0, 1.0];
        n.zeta = vec![1.0, 1.0];
        assert!(secant_direction(&n).is_none());
        // (0.2, 0.02) / sqrt(0.0404)
        n.z_init = vec![0.0, -1.0];
        n.zeta = vec![0.2, -0.98];
        let d = secant_direction(&n).unwrap();
        assert_relative_eq!(d.as_slice()[0], 0.995_037_190_209_989_1, max_relative = 1e-14);
        assert_relative_eq!(d.as_slice()[1], 0.099_503_719_020_998_91, max_relative = 1e-14);
    }

    #[test]
    fn single_leaf_paths() {
        let n = node(Color::Green, 3.0, 2, 0);
        let paths = compute_paths(&n);
        let valid = paths.valid.unwrap();
        assert_eq!(Some(&valid), paths.viable.as_ref());
        assert_eq!((valid.length, valid.cost), (3.0, 2));
        let red = node(Color::Red, 3.0, 2, 0);
        assert_eq!(compute_paths(&red), NodePaths::default());
        let yellow = node(Color::Yellow, 3.0, 2, 0);
        let paths = compute_paths(&yellow);
        assert!(paths.valid.is_none() && paths.viable.is_some());
    }

    #[test]
    fn two_node_cost() {
        let mut parent = node(Color::Green, 1.0, 3, 0);
        parent.children.push(node(Color::Green, 1.0, 2, 1));
        let valid = compute_paths(&parent).valid.unwrap();
        assert_eq!(valid.cost, 3);
        assert_eq!(valid.length, 2.0);
        assert_eq!(valid.nodes(&parent).len(), 2);
        parent.children[0].nu = 4;
        assert_eq!(compute_paths(&parent).valid.unwrap().cost, 5);
    }

    #[test]
    fn best_path_examples() {
        let h = 1.0;
        let path = |length: f64, cost| PathMetrics { length, cost, route: vec![0] };
        let (valid, viable) = (path(h / 2.0, 2), path(5.0 * h / 8.0, 2));
        assert_eq!(choose_best_path(&valid, &viable), &valid);
        let (valid, viable) = (path(1.5 * h, 3), path(2.25 * h, 3));
        assert_eq!(choose_best_path(&valid, &viable), &viable);
        let (valid, viable) = (path(1.0, 2), PathMetrics { length: 1.5, cost: 2, route: vec![1] });
        // 1/2 == 1.5/3: tie keeps valid
        assert_eq!(choose_best_path(&valid, &viable), &valid);
        let free = PathMetrics { length: 0.1, cost: 0, route: vec![] };
        assert_eq!(choose_best_path(&free, &path(100.0, 0)), &free);
    }

    #[test]
    fn base_step_reduction() {
        let mut n = node(Color::Green, 100.0, 0, 0);
        reduce_base_step(&mut n, &[0.75, 1.0, 2.0]);
        assert_relative_eq!(n.h_base, 33.75, max_relative = 1e-15);
        let mut n = node(Color::Green, 8.0, 0, 0);
        reduce_base_step(&mut n, &[0.25, 1.0, 1.5]);
        assert_relative_eq!(n.h_base, 1.2, max_relative = 1e-15);
        let mut n = node(Color::Green, 2.0, 0, 0);
        reduce_base_step(&mut n, &[1.0]);
        assert_relative_eq!(n.h_base, 1.8, max_relative = 1e-15);
    }

    #[test]
    fn red_children_survive() {
        let mut root = node(Color::Green, 0.0, 0, 0);
        for _ in 0..3 {
            root.children.push(node(Color::Red, 1.0, 1, 0));
        }
        let report = prune_tree(&mut root, &params());
        assert_eq!(report, PruneReport::default());
        assert_eq!(root.children.len(), 3);
    }

    #[test]
    fn promoted_root_keeps_a_yellow_child() {
        // a root that carries its own step count must not prefer "stop here"
        let mut root = node(Color::Green, 5.0, 5, 0);
        root.children.push(node(Color::Yellow, 1.5, 3, 0));
        root.children.push(node(Color::Yellow, 2.0, 3, 0));
        let report = prune_tree(&mut root, &params());
        assert_eq!(report.redundant_removed, 1);
        assert_eq!(root.children.len(), 1);
        assert_eq!(root.children[0].h_init, 2.0);
    }

    #[test]
    fn all_children_black_flags_reduction() {
        let p = params();
        let mut root = node(Color::Green, 0.0, 0, 0);
        root.h_base = 100.0;
        for _ in 0..3 {
            root.children.push(node(Color::Black, 1.0, 1, 0));
        }
        let report = prune_tree(&mut root, &p);
        assert_eq!(report.black_removed, 3);
        assert_eq!(reduce_failed_base_steps(&mut root, &p.scalings), 1);
        assert_relative_eq!(root.h_base, 33.75, max_relative = 1e-15);
        // flag is consumed
        assert_eq!(reduce_failed_base_steps(&mut root, &p.scalings), 0);
    }

    #[test]
    fn breadth_first_leaves() {
        let mut root = node(Color::Green, 0.0, 0, 0);
        let mut a = node(Color::Red, 1.0, 1, 0);
        a.children.push(node(Color::Red, 1.0, 0, 1));
        root.children.push(a);
        root.children.push(node(Color::Red, 1.0, 1, 0));
        let leaves = root.leaves_breadth_first();
        assert_eq!(leaves, vec![(vec![1], 1), (vec![0, 0], 2)]);
        assert_eq!(root.size(), 4);
        assert_eq!(root.depth(), 2);
        assert!(root.descendant(&[0, 0]).is_some());
        assert!(root.descendant(&[1, 0]).is_none());
    }
}
