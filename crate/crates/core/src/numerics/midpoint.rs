//! Fixed-step implicit midpoint rule for linear planar systems.
//!
//! Each step solves `(I - h/2 A) y1 = (I + h/2 A) y0` with `A` evaluated at
//! the step midpoint. The rule is A-stable, so it tolerates decay rates far
//! beyond what the explicit integrator can step over, at second order.

use super::dop853::DenseStep;
use super::linalg::{mat2_det, mat2_mul, mat2_solve, Mat2, IDENTITY2};
use super::{LinearSystem2, OdeSystem};

/// One-step propagator and its determinant.
fn step_matrix<S: LinearSystem2>(sys: &S, t: f64, h: f64) -> Option<(Mat2, f64)> {
    let a = sys.matrix(t + 0.5 * h);
    let half = 0.5 * h;
    let lhs = [[1.0 - half * a[0][0], -half * a[0][1]], [-half * a[1][0], 1.0 - half * a[1][1]]];
    let rhs = [[1.0 + half * a[0][0], half * a[0][1]], [half * a[1][0], 1.0 + half * a[1][1]]];
    let c0 = mat2_solve(&lhs, &[rhs[0][0], rhs[1][0]])?;
    let c1 = mat2_solve(&lhs, &[rhs[0][1], rhs[1][1]])?;
    let det = mat2_det(&rhs) / mat2_det(&lhs);
    Some(([[c0[0], c1[0]], [c0[1], c1[1]]], det))
}

/// Fundamental matrix over `[t0, t1]` in `steps` equal steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagation {
    pub matrix: Mat2,
    pub log_abs_det: f64,
    pub det_sign: f64,
}

pub fn propagate<S: LinearSystem2>(sys: &S, t0: f64, t1: f64, steps: usize) -> Option<Propagation> {
    let h = (t1 - t0) / steps as f64;
    let mut matrix = IDENTITY2;
    let mut log_abs_det = 0.0;
    let mut det_sign = 1.0;
    for k in 0..steps {
        let t = t0 + h * k as f64;
        let (s, det) = step_matrix(sys, t, h)?;
        matrix = mat2_mul(&s, &matrix);
        log_abs_det += det.abs().ln();
        det_sign *= det.signum();
    }
    Some(Propagation { matrix, log_abs_det, det_sign })
}

/// Steps a single solution from `t0` to `t1`, reporting each step as a
/// cubic Hermite dense segment.
pub fn trajectory<S, F>(sys: &S, t0: f64, y0: [f64; 2], t1: f64, steps: usize, mut on_step: F) -> Option<[f64; 2]>
where
    S: LinearSystem2,
    F: FnMut(&DenseStep<2>),
{
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    let mut f0 = sys.rhs(t0, &y);
    for k in 0..steps {
        let t = t0 + h * k as f64;
        let t_next = if k + 1 == steps { t1 } else { t0 + h * (k + 1) as f64 };
        let (s, _) = step_matrix(sys, t, h)?;
        let y_next = [s[0][0] * y[0] + s[0][1] * y[1], s[1][0] * y[0] + s[1][1] * y[1]];
        let f1 = sys.rhs(t_next, &y_next);
        on_step(&DenseStep::hermite(t, t_next - t, &y, &f0, &y_next, &f1));
        y = y_next;
        f0 = f1;
    }
    Some(y)
}
