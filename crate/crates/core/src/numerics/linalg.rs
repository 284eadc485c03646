//! Small dense linear algebra: 2x2 helpers and an LU determinant.

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY2: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn mat2_det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Solves `a x = b` by Cramer's rule; `None` for a singular matrix.
pub fn mat2_solve(a: &Mat2, b: &[f64; 2]) -> Option<[f64; 2]> {
    let det = mat2_det(a);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some([(b[0] * a[1][1] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - b[0] * a[1][0]) / det])
}

/// Gram–Schmidt QR of a 2x2 matrix given by its columns. Returns the
/// orthonormal columns and the upper-triangular factor `[r11, r12, r22]`
/// with `r11, r22 >= 0`.
pub fn qr2(col0: [f64; 2], col1: [f64; 2]) -> ([[f64; 2]; 2], [f64; 3]) {
    let r11 = col0[0].hypot(col0[1]);
    let q0 = [col0[0] / r11, col0[1] / r11];
    let r12 = q0[0] * col1[0] + q0[1] * col1[1];
    let mut w = [col1[0] - r12 * q0[0], col1[1] - r12 * q0[1]];
    // One reorthogonalization pass keeps q1 orthogonal to working precision.
    let corr = q0[0] * w[0] + q0[1] * w[1];
    w = [w[0] - corr * q0[0], w[1] - corr * q0[1]];
    let r12 = r12 + corr;
    let r22 = w[0].hypot(w[1]);
    let q1 = [w[0] / r22, w[1] / r22];
    ([q0, q1], [r11, r12, r22])
}

/// Outcome of an LU factorization with partial pivoting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LuDeterminant {
    Value(f64),
    /// Zero pivot in the given column.
    Singular(usize),
}

/// Determinant of a square row-major matrix by Gaussian elimination with
/// partial pivoting. The matrix is consumed as scratch space.
pub fn lu_determinant(mut a: Vec<f64>, n: usize) -> LuDeterminant {
    assert_eq!(a.len(), n * n, "matrix is not {n}x{n}");
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return LuDeterminant::Singular(col);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = a[row * n + col] / p;
            if factor != 0.0 {
                for k in col..n {
                    a[row * n + k] -= factor * a[col * n + k];
                }
            }
        }
    }
    LuDeterminant::Value(det)
}
