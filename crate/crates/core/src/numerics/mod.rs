//! Numerical building blocks: compensated summation, Gauss–Kronrod
//! quadrature, the explicit 8th-order Dormand–Prince integrator, the
//! implicit midpoint fallback and small dense linear algebra.

pub mod dop853;
pub mod kahan;
pub mod linalg;
pub mod midpoint;
pub mod quadrature;

/// A first-order system `y' = f(t, y)` of fixed dimension.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

/// A linear planar system `y' = A(t) y`.
///
/// Every equation in this crate is of this form. The blanket impls below let
/// the same coefficients drive a single trajectory (`N = 2`) or both columns
/// of a fundamental matrix at once (`N = 4`, column-major).
pub trait LinearSystem2 {
    fn matrix(&self, t: f64) -> [[f64; 2]; 2];
}

impl<S: LinearSystem2> OdeSystem<2> for S {
    fn rhs(&self, t: f64, y: &[f64; 2]) -> [f64; 2] {
        let a = self.matrix(t);
        [a[0][0] * y[0] + a[0][1] * y[1], a[1][0] * y[0] + a[1][1] * y[1]]
    }
}

impl<S: LinearSystem2> OdeSystem<4> for S {
    fn rhs(&self, t: f64, y: &[f64; 4]) -> [f64; 4] {
        let a = self.matrix(t);
        [
            a[0][0] * y[0] + a[0][1] * y[1],
            a[1][0] * y[0] + a[1][1] * y[1],
            a[0][0] * y[2] + a[0][1] * y[3],
            a[1][0] * y[2] + a[1][1] * y[3],
        ]
    }
}
