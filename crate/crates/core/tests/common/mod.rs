#![allow(dead_code)]

use std::path::PathBuf;

use pampac::io::read_initial_point;
use pampac::params::RunParams;
use pampac::problem::{CurvePoint, Direction};
use pampac::problems::ks::KS_AMPLITUDE;
use pampac::problems::{KsConfig, KsProblem};
use pampac::{Color, TreeNode};
use proptest::prelude::*;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn circle_params() -> RunParams {
    pampac::io::read_parameters(&data("circle.params")).unwrap()
}

pub fn ks_params() -> RunParams {
    pampac::io::read_parameters(&data("ks_n128.params")).unwrap()
}

pub fn ks_fixture() -> (KsProblem, Vec<f64>) {
    let z = read_initial_point(&data("ks_n128_lambda0.1828.txt"), 130).unwrap();
    let problem = KsProblem::new(KsConfig::from_point(KS_AMPLITUDE, &z).unwrap()).unwrap();
    (problem, z)
}

/// A tree node with hand-set bookkeeping; geometry is irrelevant for pruning.
pub fn node(color: Color, h_init: f64, nu: u32, nu_init: u32) -> TreeNode {
    let mut n = TreeNode::spawn(vec![0.0, 0.0], Direction::axis(2, 1), h_init, nu_init);
    n.color = color;
    n.nu = nu;
    n
}

pub fn green_root(h_base: f64) -> TreeNode {
    TreeNode::root(CurvePoint { z: vec![0.0, 0.0], residual_norm: 0.0 }, Direction::axis(2, 1), h_base)
}

/// Root, three children, nine grandchildren. One child is
/// YELLOW, every other non-root node RED.
pub fn wide_tree() -> TreeNode {
    let h = 1.0;
    let t = [0.75, 1.0, 2.0];
    let mut root = green_root(h);
    for (i, ti) in t.iter().enumerate() {
        let color = if i == 0 { Color::Yellow } else { Color::Red };
        let mut child = node(color, ti * h, 1, 0);
        for tj in t {
            child.children.push(node(Color::Red, tj * ti * h, 0, 1));
        }
        root.children.push(child);
    }
    root
}

/// The wide tree after one corrector round: four GREEN, two YELLOW,
/// two RED and four BLACK nodes below the root.
pub fn colored_wide_tree() -> TreeNode {
    let mut root = wide_tree();
    let colors = [
        (Color::Green, [Color::Green, Color::Green, Color::Yellow]),
        (Color::Green, [Color::Yellow, Color::Red, Color::Red]),
        (Color::Black, [Color::Black, Color::Black, Color::Black]),
    ];
    for (child, (c, grand)) in root.children.iter_mut().zip(colors) {
        child.color = c;
        child.nu = 2;
        for (g, gc) in child.children.iter_mut().zip(grand) {
            g.color = gc;
            g.nu = 1;
        }
    }
    root
}

pub const TWO_SUBTREE_SCALINGS: [f64; 3] = [0.25, 1.0, 1.5];

/// Two-level tree with base step `h`. The root took two corrector steps;
/// its children were spawned after its first.
///
/// Subtree 1 hangs off the t1 child, subtree 2 off the t2 child; subtree 3 is
/// the whole tree. `s2` is the color of the subtree-2 root.
pub fn two_subtree_tree(h: f64, s2: Color) -> TreeNode {
    let [t1, t2, t3] = TWO_SUBTREE_SCALINGS;
    let mut root = green_root(h);
    root.h_init = h;
    root.nu = 2;

    let mut s1 = node(Color::Green, t1 * h, 1, 1);
    s1.children.push(node(Color::Green, t1 * t1 * h, 1, 1));
    s1.children.push(node(Color::Green, t2 * t1 * h, 1, 1));
    s1.children.push(node(Color::Yellow, t3 * t1 * h, 1, 1));

    let mut sub2 = node(s2, t2 * h, 1, 1);
    sub2.children.push(node(Color::Yellow, t1 * t2 * h, 1, 1));
    sub2.children.push(node(Color::Red, t2 * t2 * h, 1, 1));
    sub2.children.push(node(Color::Red, t3 * t2 * h, 1, 1));

    root.children.push(s1);
    root.children.push(sub2);
    root
}

pub fn two_subtree_params() -> RunParams {
    RunParams { scalings: TWO_SUBTREE_SCALINGS.to_vec(), ..circle_params() }
}

/// Valid RunParams over wide ranges, including negative H_INIT.
pub fn valid_params() -> impl Strategy<Value = RunParams> {
    (
        (2usize..200, 0usize..1000, -1e3f64..1e3, 1e-6f64..1e3),
        (1e-12f64..1.0, 1.0f64..1e4, 0.0f64..1.0, proptest::bool::ANY, 1e-8f64..1.0),
        (1u32..50, 1e-14f64..1e-2, 0.01f64..0.99, 1.01f64..5.0),
        (1usize..6, proptest::collection::vec(1e-3f64..10.0, 1..6), 0u32..4, 1usize..64),
    )
        .prop_map(|(a, b, c, d)| {
            let (n_dim, index_seed, lo, width) = a;
            let (h_min, h_ratio, h_frac, flip, delta) = b;
            let (max_iter, tol, mu, gamma) = c;
            let (depth, scalings, verbose, budget) = d;
            let h_max = h_min * h_ratio;
            let magnitude = (h_min + (h_max - h_min) * h_frac).min(h_max);
            RunParams {
                n_dim,
                lambda_min: lo,
                lambda_max: lo + width,
                lambda_index: index_seed % n_dim,
                delta_lambda: delta,
                h_min,
                h_max,
                h_init: if flip { -magnitude } else { magnitude },
                max_iter,
                tol_residual: tol,
                mu,
                gamma,
                max_depth: depth,
                max_children: scalings.len(),
                scalings,
                verbose,
                worker_budget: budget,
            }
        })
        .prop_filter("valid parameters", |p| p.validate().is_ok())
}

/// Rows of finite doubles, including subnormals and signed zeros.
pub fn curve_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..8).prop_flat_map(|dim| {
        proptest::collection::vec(
            proptest::collection::vec(
                proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
                dim,
            ),
            1..30,
        )
    })
}
