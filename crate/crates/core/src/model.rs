//! Parameter and result types shared by the three Floquet routes.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of samples per period for periodic parts.
pub const DEFAULT_GRID_LEN: usize = 256;

/// Physical parameters of `m x'' + gamma x' - epsilon cos(omega t) x = 0`.
///
/// Fields are public so that invalid combinations can be constructed and
/// inspected with [`validate`]; numerical routines re-check what they need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MathieuParams {
    pub m: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub omega: f64,
}

impl MathieuParams {
    /// Builds parameters and rejects anything that fails the hard
    /// positivity/finiteness predicates. `wkb_valid` is not required here.
    pub fn new(m: f64, gamma: f64, epsilon: f64, omega: f64) -> Result<Self> {
        let params = Self { m, gamma, epsilon, omega };
        params.ensure_valid()?;
        Ok(params)
    }

    pub fn with_m(self, m: f64) -> Self {
        Self { m, ..self }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }

    /// Drive period `2 pi / omega`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `gamma^2/4 + m epsilon cos(omega t)`, the Olver-form coefficient
    /// after removing the damping term.
    pub fn liouville_coefficient(&self, t: f64) -> f64 {
        0.25 * self.gamma * self.gamma + self.m * self.epsilon * (self.omega * t).cos()
    }

    /// `gamma^2/4 > m |epsilon|`: the Liouville coefficient never vanishes.
    pub fn wkb_valid(&self) -> bool {
        0.25 * self.gamma * self.gamma > self.m * self.epsilon.abs()
    }

    /// `gamma/(m omega)`, the ratio of the fast decay rate to the drive
    /// frequency. Large values make the decaying mode stiff.
    pub fn stiffness_ratio(&self) -> f64 {
        self.gamma / (self.m * self.omega)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate(self);
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidParams(report.to_string()))
        }
    }

    pub fn ensure_wkb_valid(&self) -> Result<()> {
        self.ensure_valid()?;
        if self.wkb_valid() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "wkb_valid violated: gamma^2/4 = {} <= m*|epsilon| = {}",
                0.25 * self.gamma * self.gamma,
                self.m * self.epsilon.abs()
            )))
        }
    }
}

/// A named invariant violation reported by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Violation {
    NonFinite(&'static str),
    MassNotPositive,
    DampingNotPositive,
    FrequencyNotPositive,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite(field) => write!(f, "{field} finite"),
            Violation::MassNotPositive => f.write_str("m > 0"),
            Violation::DampingNotPositive => f.write_str("gamma > 0"),
            Violation::FrequencyNotPositive => f.write_str("omega > 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
    /// Reported separately: failing it does not make the parameters invalid,
    /// it only rules out the WKB predictions.
    pub wkb_valid: bool,
}

impl ValidityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok (wkb_valid={})", self.wkb_valid);
        }
        let names: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "violated: {}", names.join(", "))
    }
}

/// Checks every parameter predicate and reports all failures by name.
pub fn validate(params: &MathieuParams) -> ValidityReport {
    let mut violations = Vec::new();
    let fields = [("m", params.m), ("gamma", params.gamma), ("epsilon", params.epsilon), ("omega", params.omega)];
    for (name, value) in fields {
        if !value.is_finite() {
            violations.push(Violation::NonFinite(name));
        }
    }
    if !(params.m > 0.0) {
        violations.push(Violation::MassNotPositive);
    }
    if !(params.gamma > 0.0) {
        violations.push(Violation::DampingNotPositive);
    }
    if !(params.omega > 0.0) {
        violations.push(Violation::FrequencyNotPositive);
    }
    let wkb_valid = violations.is_empty() && params.wkb_valid();
    ValidityReport { violations, wkb_valid }
}

/// Which Floquet mode a periodic part belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeriodicBranch {
    Max,
    Min,
}

impl fmt::Display for PeriodicBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodicBranch::Max => f.write_str("max"),
            PeriodicBranch::Min => f.write_str("min"),
        }
    }
}

/// Samples of a `2 pi / omega`-periodic function on a uniform grid that
/// includes both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPart {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Scale factor that was applied to the raw samples.
    pub normalization: f64,
    pub branch: PeriodicBranch,
}

impl PeriodicPart {
    /// `|P(T) - P(0)| / max|P|`.
    pub fn periodicity_residual(&self) -> f64 {
        let first = self.values.first().copied().unwrap_or(0.0);
        let last = self.values.last().copied().unwrap_or(0.0);
        let scale = self.sup_norm();
        if scale > 0.0 {
            (last - first).abs() / scale
        } else {
            (last - first).abs()
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Sup-norm distance to another part sampled on the same grid.
    pub fn sup_distance(&self, other: &PeriodicPart) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "grids differ in length");
        self.values.iter().zip(&other.values).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// `len` equally spaced times covering `[0, period]`, both ends included.
pub fn uniform_grid(period: f64, len: usize) -> Vec<f64> {
    assert!(len >= 2, "grid needs at least two points");
    let last = (len - 1) as f64;
    (0..len).map(|k| if k + 1 == len { period } else { period * k as f64 / last }).collect()
}

/// Floquet data extracted from the monodromy matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetResult {
    /// Row-major 2x2 monodromy matrix.
    pub monodromy: [[f64; 2]; 2],
    /// `ln det(monodromy)` accumulated segment by segment; it stays finite
    /// when the determinant itself underflows.
    pub log_det: f64,
    /// `[rho_1, rho_2]` with `rho_1 >= rho_2 > 0`. `rho_2` may underflow to
    /// zero; `lambda_min` carries the information in that case.
    pub multipliers: [f64; 2],
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub period: f64,
    /// `|det(monodromy) e^{gamma T / m} - 1|`.
    pub abel_residual: f64,
}

/// Which evaluation of the exponent formula produced a Hill estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HillPath {
    /// Solve the cosh relation directly.
    Direct,
    /// Overflow-free logarithmic form.
    LogDomain,
}

impl fmt::Display for HillPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HillPath::Direct => f.write_str("direct"),
            HillPath::LogDomain => f.write_str("log_domain"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillResult {
    pub delta0: f64,
    /// `1 - delta0`, accumulated separately so that small deficits keep
    /// their relative precision.
    pub deficit: f64,
    /// Half-width n of the `(2n+1) x (2n+1)` truncation used.
    pub truncation_n: usize,
    pub c_exponent: f64,
    pub lambda_max_hill: f64,
    pub lambda_min_hill: f64,
    pub path: HillPath,
}
