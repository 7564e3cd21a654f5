use crate::linalg::Matrix;
use crate::problem::ProblemDefinition;

/// `(x, λ) = (1, 0)`, on the curve.
pub const CIRCLE_START: [f64; 2] = [1.0, 0.0];

/// The unit circle `x² + λ² - 1 = 0` with `z = (x, λ)`; λ has a fold at `(0, 1)`.
pub fn circle_problem() -> ProblemDefinition {
    ProblemDefinition::new(2, 1, |z| vec![z[0] * z[0] + z[1] * z[1] - 1.0])
        .expect("valid dimensions")
        .with_jacobian(|z| Matrix::from_row_major(1, 2, vec![2.0 * z[0], 2.0 * z[1]]))
}
