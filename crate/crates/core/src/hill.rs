//! Hill's infinite determinant at zero exponent shift: truncated
//! determinants, their limit `Delta(0)`, the series that controls its
//! leading order, and the characteristic exponents it determines.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HillPath, HillResult, MathieuParams};
use crate::numerics::kahan::{self, KahanSum};
use crate::numerics::linalg::{lu_determinant, LuDeterminant};

/// Default relative tolerance for the doubling loop in [`delta0`]. The
/// truncation error decays like `n^{-3}`, so this is reached well inside
/// [`MAX_TRUNCATION`] for masses down to a few thousandths.
pub const DEFAULT_HILL_TOL: f64 = 1e-12;

/// Largest half-width tried by [`delta0`].
pub const MAX_TRUNCATION: usize = 1_000_000;

/// Largest half-width accepted by [`det_truncated_direct`].
pub const MAX_DIRECT_TRUNCATION: usize = 2000;

/// Largest `pi gamma / (omega m)` for which `cosh` is evaluated directly.
pub const COSH_OVERFLOW_ARG: f64 = 700.0;

/// Fourier coefficients of the Liouville-transformed equation:
/// `G_0 = -(gamma/2m)^2`, `G_1 = G_{-1} = -epsilon/2m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillCoefficients {
    pub g0: f64,
    pub g1: f64,
}

impl HillCoefficients {
    pub fn new(params: &MathieuParams) -> Self {
        let half_rate = params.gamma / (2.0 * params.m);
        Self { g0: -half_rate * half_rate, g1: -params.epsilon / (2.0 * params.m) }
    }
}

/// `(epsilon/2m) / ((n omega)^2 + (gamma/2m)^2)`: the off-diagonal entry of
/// row `n` after normalizing the diagonal to one.
pub fn c_n(params: &MathieuParams, n: usize) -> f64 {
    let half_rate = params.gamma / (2.0 * params.m);
    let nw = n as f64 * params.omega;
    (params.epsilon / (2.0 * params.m)) / (nw * nw + half_rate * half_rate)
}

/// Streaming evaluation of the centered truncations.
///
/// The centered `(2n+1) x (2n+1)` matrix is two identical chains (rows
/// `1..n` and `-n..-1`) joined through row 0, so
/// `det M_{2n+1} = K(n) (K(n) - 2 c_0 c_1 K'(n))` where `K` is the
/// continuant of rows `1..n` and `K'` that of rows `2..n`. Both obey
/// `K(k) = K(k-1) - c_{k-1} c_k K(k-2)`. The deficits `1 - K` are carried
/// instead of `K` itself, since they are the small quantities of interest.
#[derive(Debug, Clone)]
struct Continuant {
    params: MathieuParams,
    n: usize,
    c_last: f64,
    q: f64,
    d1: KahanSum,
    d1_prev: f64,
    d2: KahanSum,
    d2_prev: f64,
}

impl Continuant {
    fn new(params: &MathieuParams) -> Self {
        let c1 = c_n(params, 1);
        Self {
            params: *params,
            n: 1,
            c_last: c1,
            q: c_n(params, 0) * c1,
            d1: KahanSum::new(),
            d1_prev: 0.0,
            d2: KahanSum::new(),
            d2_prev: 0.0,
        }
    }

    fn step(&mut self) {
        let k = self.n + 1;
        let c_k = c_n(&self.params, k);
        let p = self.c_last * c_k;
        let d1 = self.d1.value();
        self.d1 += p;
        self.d1 += -p * self.d1_prev;
        self.d1_prev = d1;
        if k >= 3 {
            let d2 = self.d2.value();
            self.d2 += p;
            self.d2 += -p * self.d2_prev;
            self.d2_prev = d2;
        }
        self.c_last = c_k;
        self.n = k;
    }

    fn extend_to(&mut self, n: usize) {
        while self.n < n {
            self.step();
        }
    }

    /// `K(n)` and `K'(n)`.
    fn factors(&self) -> (f64, f64) {
        (1.0 - self.d1.value(), 1.0 - self.d2.value())
    }

    /// `1 - det M_{2n+1}`.
    fn deficit(&self) -> f64 {
        let d1 = self.d1.value();
        let d2 = self.d2.value();
        let q2 = 2.0 * self.q;
        let e = kahan::sum([d1, q2, -q2 * d2]);
        kahan::sum([d1, d1, q2, -q2 * d2, -d1 * e])
    }

    fn det(&self) -> f64 {
        let (k1, k2) = self.factors();
        k1 * (k1 - 2.0 * self.q * k2)
    }
}

/// Truncated determinants `det M_3, ..., det M_{2n+1}` with the quantities
/// used to build them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminantTable {
    pub n: usize,
    /// `c_0, ..., c_n`.
    pub c: Vec<f64>,
    /// `det M_{2k+1}` for `k = 1..=n`.
    pub det_values: Vec<f64>,
    /// `1 - det M_{2k+1}` for `k = 1..=n`, accumulated directly.
    pub deficits: Vec<f64>,
    /// `det M_{2k+1} / prod_{i=1}^{k} (1 - c_i c_{i+1})` for `k = 1..=n`.
    pub f_values: Vec<f64>,
}

impl DeterminantTable {
    pub fn build(params: &MathieuParams, n: usize) -> Self {
        assert!(n >= 1, "half-width must be at least 1");
        let c: Vec<f64> = (0..=n + 1).map(|k| c_n(params, k)).collect();
        let mut cont = Continuant::new(params);
        let mut det_values = Vec::with_capacity(n);
        let mut deficits = Vec::with_capacity(n);
        let mut f_values = Vec::with_capacity(n);
        let mut product = 1.0;
        for k in 1..=n {
            cont.extend_to(k);
            product *= 1.0 - c[k] * c[k + 1];
            let det = cont.det();
            det_values.push(det);
            deficits.push(cont.deficit());
            f_values.push(det / product);
        }
        let mut c = c;
        c.truncate(n + 1);
        Self { n, c, det_values, deficits, f_values }
    }

    /// `det M_{2k+1}`.
    pub fn det(&self, k: usize) -> f64 {
        self.det_values[k - 1]
    }
}

/// `det M_{2n+1}` by the continuant recurrence.
pub fn det_truncated(params: &MathieuParams, n: usize) -> f64 {
    assert!(n >= 1, "half-width must be at least 1");
    let mut cont = Continuant::new(params);
    cont.extend_to(n);
    cont.det()
}

/// `1 - det M_{2n+1}`, keeping full relative precision when the
/// determinant is close to one.
pub fn det_truncated_deficit(params: &MathieuParams, n: usize) -> f64 {
    assert!(n >= 1, "half-width must be at least 1");
    let mut cont = Continuant::new(params);
    cont.extend_to(n);
    cont.deficit()
}

/// The explicit `(2n+1) x (2n+1)` truncation, row-major, rows and columns
/// indexed `-n..=n`.
pub fn assemble_truncation(params: &MathieuParams, n: usize) -> Vec<f64> {
    let size = 2 * n + 1;
    let mut a = vec![0.0; size * size];
    for i in 0..size {
        let c = c_n(params, i.abs_diff(n));
        a[i * size + i] = 1.0;
        if i > 0 {
            a[i * size + i - 1] = c;
        }
        if i + 1 < size {
            a[i * size + i + 1] = c;
        }
    }
    a
}

/// `det M_{2n+1}` from the assembled matrix by LU with partial pivoting.
pub fn det_truncated_direct(params: &MathieuParams, n: usize) -> Result<f64> {
    if n == 0 || n > MAX_DIRECT_TRUNCATION {
        return Err(Error::InvalidConfig(format!(
            "direct determinant needs 1 <= n <= {MAX_DIRECT_TRUNCATION}, got {n}"
        )));
    }
    match lu_determinant(assemble_truncation(params, n), 2 * n + 1) {
        LuDeterminant::Value(det) => Ok(det),
        LuDeterminant::Singular(row) => Err(Error::SingularTruncation { row }),
    }
}

/// Converged `Delta(0)` and the truncation that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaZero {
    pub delta0: f64,
    /// `1 - delta0`, accumulated separately.
    pub deficit: f64,
    pub truncation_n: usize,
}

/// First half-width tried by [`delta0`]: eight times the index where `c_n`
/// starts to fall off.
pub fn initial_truncation(params: &MathieuParams) -> usize {
    let shoulder = params.gamma / (2.0 * params.m * params.omega);
    ((8.0 * shoulder).ceil() as usize).max(1)
}

/// `Delta(0) = lim det M_{2n+1}`, doubling `n` until two successive values
/// agree to `tol` relative.
pub fn delta0(params: &MathieuParams, tol: f64) -> Result<DeltaZero> {
    params.ensure_valid()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("hill tolerance must be positive, got {tol}")));
    }
    let mut n = initial_truncation(params);
    let mut cont = Continuant::new(params);
    cont.extend_to(n);
    let mut previous = cont.deficit();
    loop {
        let next = n.saturating_mul(2);
        if next > MAX_TRUNCATION {
            return Err(Error::NoConvergence { n: next });
        }
        cont.extend_to(next);
        n = next;
        let deficit = cont.deficit();
        let delta = 1.0 - deficit;
        if (deficit - previous).abs() < tol * delta.abs() {
            return Ok(DeltaZero { delta0: delta, deficit, truncation_n: n });
        }
        previous = deficit;
    }
}

/// Partial sum `2 sum_{n=0}^{terms-1} c_n c_{n+1}`.
pub fn series_s_bruteforce(params: &MathieuParams, terms: usize) -> f64 {
    let mut acc = KahanSum::new();
    let mut c_prev = c_n(params, 0);
    for n in 0..terms {
        let c_next = c_n(params, n + 1);
        acc += 2.0 * c_prev * c_next;
        c_prev = c_next;
    }
    acc.value()
}

/// Partial sums of the two bounding series, `2 sum c_{n+1}^2` (lower) and
/// `2 sum c_n^2` (upper), over `n = 0..terms`.
pub fn bound_series_bruteforce(params: &MathieuParams, terms: usize) -> SeriesBounds {
    let mut lower = KahanSum::new();
    let mut upper = KahanSum::new();
    for n in 0..terms {
        let c = c_n(params, n);
        let c_next = c_n(params, n + 1);
        upper += 2.0 * c * c;
        lower += 2.0 * c_next * c_next;
    }
    SeriesBounds { lower: lower.value(), upper: upper.value() }
}

/// `sum_{n>=0} 1/(n^2 + a)^2` in closed form:
/// `1/(2a^2) + pi coth(pi sqrt a)/(4 a^{3/2}) + pi^2 csch^2(pi sqrt a)/(4a)`.
pub fn sum_inverse_square_shifted(a: f64) -> f64 {
    assert!(a > 0.0, "shift must be positive");
    let x = PI * a.sqrt();
    let coth = 1.0 / x.tanh();
    let sinh = x.sinh();
    let csch2 = 1.0 / (sinh * sinh);
    0.5 / (a * a) + PI * coth / (4.0 * a * a.sqrt()) + PI * PI * csch2 / (4.0 * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesBounds {
    pub lower: f64,
    pub upper: f64,
}

impl SeriesBounds {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Closed form of the upper bounding series `2 sum_{n>=0} c_n^2`.
pub fn series_s_closed(params: &MathieuParams) -> f64 {
    let w2 = params.omega * params.omega;
    let a = params.gamma * params.gamma / (4.0 * params.m * params.m * w2);
    params.epsilon * params.epsilon / (2.0 * params.m * params.m * w2 * w2) * sum_inverse_square_shifted(a)
}

/// Closed-form bounds `2 sum c_{n+1}^2 <= S <= 2 sum c_n^2`.
pub fn series_s_bounds(params: &MathieuParams) -> SeriesBounds {
    let upper = series_s_closed(params);
    let c0 = c_n(params, 0);
    SeriesBounds { lower: upper - 2.0 * c0 * c0, upper }
}

/// Exponent data recovered from `Delta(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillExponents {
    pub c: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub path: HillPath,
}

/// Picks the direct path while `cosh(pi gamma/(omega m))` is representable.
pub fn default_path(params: &MathieuParams) -> HillPath {
    if PI * params.gamma / (params.omega * params.m) <= COSH_OVERFLOW_ARG {
        HillPath::Direct
    } else {
        HillPath::LogDomain
    }
}

/// Solves `cosh(2 pi c/omega) = 1 - Delta + Delta cosh(pi gamma/(omega m))`
/// for `c`; `lambda = +-c - gamma/2m`.
pub fn exponent_from_delta(params: &MathieuParams, delta0: f64) -> Result<HillExponents> {
    exponent_from_delta_with(params, delta0, default_path(params))
}

/// As [`exponent_from_delta`] with an explicit evaluation path. The log
/// path writes `arccosh y = ln(2y) + ln((1 + sqrt(1 - y^-2))/2)` and
/// expands `ln(2y)` around `ln Delta + pi gamma/(omega m)`, so nothing
/// overflows and no correction term is dropped.
pub fn exponent_from_delta_with(params: &MathieuParams, delta0: f64, path: HillPath) -> Result<HillExponents> {
    params.ensure_valid()?;
    let a = PI * params.gamma / (params.omega * params.m);
    let scale = params.omega / (2.0 * PI);
    let half_rate = params.gamma / (2.0 * params.m);
    if !(delta0 > 0.0 && delta0.is_finite()) {
        let argument = 1.0 - delta0 + delta0 * a.cosh();
        return Err(Error::DomainError { delta0, argument });
    }
    let lambda_max = match path {
        HillPath::Direct => {
            let y = 1.0 - delta0 + delta0 * a.cosh();
            if !(y >= 1.0) || !y.is_finite() {
                return Err(Error::DomainError { delta0, argument: y });
            }
            scale * y.acosh() - half_rate
        }
        HillPath::LogDomain => {
            let ea = (-a).exp();
            // ln(2y) - pi gamma/(omega m), kept apart from the large term.
            let shifted = delta0.ln() + (ea * ea + 2.0 * (1.0 - delta0) * ea / delta0).ln_1p();
            let inv_y = 2.0 * (-(shifted + a)).exp();
            let tail = (0.5 * (1.0 + (1.0 - inv_y * inv_y).sqrt())).ln();
            scale * (shifted + tail)
        }
    };
    Ok(HillExponents { c: lambda_max + half_rate, lambda_max, lambda_min: -params.gamma / params.m - lambda_max, path })
}

/// `Delta(0)` and the exponents it implies, on the default path.
pub fn hill(params: &MathieuParams, tol: f64) -> Result<HillResult> {
    let d = delta0(params, tol)?;
    let e = exponent_from_delta(params, d.delta0)?;
    Ok(HillResult {
        delta0: d.delta0,
        deficit: d.deficit,
        truncation_n: d.truncation_n,
        c_exponent: e.c,
        lambda_max_hill: e.lambda_max,
        lambda_min_hill: e.lambda_min,
        path: e.path,
    })
}
