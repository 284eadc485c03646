//! Direct integration of the equation over one drive period: trajectories,
//! the monodromy matrix, Floquet multipliers and exponents, and the
//! numerically extracted periodic parts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{uniform_grid, FloquetResult, MathieuParams, PeriodicBranch, PeriodicPart};
use crate::numerics::dop853::{DenseStep, Dop853, Tolerances};
use crate::numerics::linalg::{qr2, Mat2};
use crate::numerics::midpoint;
use crate::numerics::LinearSystem2;

/// Above this value of `gamma/(m omega)` the explicit integrator is refused
/// unless stiff mode is requested.
pub const STIFFNESS_LIMIT: f64 = 1e4;

/// Target `e`-folds of decay of the second fundamental column between
/// re-orthonormalizations.
const SEGMENT_DECAY: f64 = 3.0;

/// Relative endpoint mismatch above which a periodic part is rejected.
const PERIODICITY_TOL: f64 = 1e-6;

/// Decay (in `e`-folds) of the unwanted mode before the min-branch periodic
/// part is sampled.
const BURN_IN_DECAY: f64 = 40.0;
const MAX_BURN_IN_PERIODS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub min_step: f64,
    /// Use the fixed-step implicit midpoint rule instead of the explicit
    /// adaptive integrator. Lifts the stiffness guard.
    pub stiff: bool,
    /// Midpoint steps per drive period in stiff mode.
    pub stiff_steps_per_period: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_steps: 10_000_000,
            min_step: 1e-12,
            stiff: false,
            stiff_steps_per_period: 20_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn with_stiff(self, stiff: bool) -> Self {
        Self { stiff, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol), ("min_step", self.min_step)];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {value}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        if self.stiff && self.stiff_steps_per_period == 0 {
            return Err(Error::InvalidConfig("stiff_steps_per_period must be positive".into()));
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances { rel_tol: self.rel_tol, abs_tol: self.abs_tol, min_step: self.min_step, max_steps: self.max_steps }
    }

    fn stiff_steps(&self, span: f64, period: f64) -> usize {
        ((self.stiff_steps_per_period as f64) * span.abs() / period).ceil().max(1.0) as usize
    }
}

/// `x' = v`, `v' = (epsilon cos(omega t) x - gamma v) / m`.
#[derive(Debug, Clone, Copy)]
pub struct MathieuSystem {
    params: MathieuParams,
}

impl MathieuSystem {
    pub fn new(params: MathieuParams) -> Self {
        Self { params }
    }
}

impl LinearSystem2 for MathieuSystem {
    fn matrix(&self, t: f64) -> Mat2 {
        let p = &self.params;
        [[0.0, 1.0], [p.epsilon * (p.omega * t).cos() / p.m, -p.gamma / p.m]]
    }
}

/// The equation satisfied by `P(t) = x(t) e^{-lambda t}`:
/// `m P'' + (gamma + 2 m lambda) P' + (c - epsilon cos(omega t)) P = 0` with
/// `c = lambda (m lambda + gamma)`.
struct ShiftedSystem {
    params: MathieuParams,
    lambda: f64,
    constant: f64,
}

impl LinearSystem2 for ShiftedSystem {
    fn matrix(&self, t: f64) -> Mat2 {
        let p = &self.params;
        [
            [0.0, 1.0],
            [(p.epsilon * (p.omega * t).cos() - self.constant) / p.m, -(p.gamma + 2.0 * p.m * self.lambda) / p.m],
        ]
    }
}

fn check_stiffness(params: &MathieuParams, cfg: &IntegratorConfig) -> Result<()> {
    let ratio = params.stiffness_ratio();
    if !cfg.stiff && ratio > STIFFNESS_LIMIT {
        return Err(Error::StiffnessGuard { ratio, limit: STIFFNESS_LIMIT });
    }
    Ok(())
}

fn sample_segments(segments: &[DenseStep<2>], t: f64) -> [f64; 2] {
    let forward = segments.first().is_none_or(|s| s.t_end() >= s.t_start());
    let idx =
        if forward { segments.partition_point(|s| s.t_end() < t) } else { segments.partition_point(|s| s.t_end() > t) };
    segments[idx.min(segments.len() - 1)].eval(t)
}

/// Runs either integrator from `t0` to `t1`, collecting dense segments.
fn solve<S: LinearSystem2>(
    sys: &S,
    t0: f64,
    y0: [f64; 2],
    t1: f64,
    period: f64,
    cfg: &IntegratorConfig,
) -> Result<(Vec<DenseStep<2>>, [f64; 2])> {
    let mut segments = Vec::new();
    if cfg.stiff {
        let steps = cfg.stiff_steps(t1 - t0, period);
        let end = midpoint::trajectory(sys, t0, y0, t1, steps, |s| segments.push(s.clone()))
            .ok_or(Error::StepUnderflow { t: t0, h: (t1 - t0) / steps as f64 })?;
        Ok((segments, end))
    } else {
        let mut integrator = Dop853::new(sys, t0, y0, cfg.tolerances());
        integrator.advance_to_dense(t1, |s| segments.push(s.clone()))?;
        Ok((segments, *integrator.state()))
    }
}

/// Accepted integrator steps of one solution, with dense output between them.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    /// Step boundaries, starting at 0 and ending at `t_end`.
    pub times: Vec<f64>,
    /// `(x, x')` at each entry of `times`.
    pub states: Vec<[f64; 2]>,
    segments: Vec<DenseStep<2>>,
}

impl StateTrajectory {
    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn final_state(&self) -> [f64; 2] {
        *self.states.last().expect("trajectory is never empty")
    }

    /// Interpolated `(x, x')` at any `t` in `[0, t_end]`.
    pub fn sample(&self, t: f64) -> [f64; 2] {
        if self.segments.is_empty() {
            return self.states[0];
        }
        sample_segments(&self.segments, t)
    }
}

/// Solves the equation from `(x0, x0')` at `t = 0` up to `t_end`.
pub fn integrate(
    params: &MathieuParams,
    initial: [f64; 2],
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<StateTrajectory> {
    params.ensure_valid()?;
    cfg.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidConfig(format!("t_end must be positive, got {t_end}")));
    }
    check_stiffness(params, cfg)?;
    let sys = MathieuSystem::new(*params);
    let (segments, end) = solve(&sys, 0.0, initial, t_end, params.period(), cfg)?;
    let mut times = vec![0.0];
    let mut states = vec![initial];
    for s in &segments {
        times.push(s.t_end());
        states.push(s.eval(s.t_end()));
    }
    *times.last_mut().unwrap() = t_end;
    *states.last_mut().unwrap() = end;
    Ok(StateTrajectory { times, states, segments })
}

/// Monodromy matrix together with its logarithmic determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    /// Row-major; column j is the state at `T` launched from `e_j`.
    pub matrix: Mat2,
    /// `ln |det matrix|`, accumulated without forming the determinant.
    pub log_det: f64,
    pub det_sign: f64,
    pub period: f64,
}

impl Monodromy {
    /// Wraps a plain matrix, taking the determinant directly.
    pub fn from_matrix(matrix: Mat2, period: f64) -> Self {
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        Self { matrix, log_det: det.abs().ln(), det_sign: det.signum(), period }
    }

    pub fn det(&self) -> f64 {
        self.det_sign * self.log_det.exp()
    }
}

/// Integrates both fundamental solutions over one period.
///
/// The pair is re-orthonormalized whenever the decaying column has lost a
/// few `e`-folds, so it never collapses onto the dominant one; the
/// determinant is accumulated from the triangular factors.
pub fn monodromy_matrix(params: &MathieuParams, cfg: &IntegratorConfig) -> Result<Monodromy> {
    params.ensure_valid()?;
    cfg.validate()?;
    check_stiffness(params, cfg)?;
    let period = params.period();
    let sys = MathieuSystem::new(*params);
    if cfg.stiff {
        let steps = cfg.stiff_steps(period, period);
        let prop = midpoint::propagate(&sys, 0.0, period, steps)
            .ok_or(Error::StepUnderflow { t: 0.0, h: period / steps as f64 })?;
        return Ok(Monodromy { matrix: prop.matrix, log_det: prop.log_abs_det, det_sign: prop.det_sign, period });
    }

    let decay = params.gamma * period / params.m;
    let segments = (decay / SEGMENT_DECAY).ceil().max(1.0) as usize;
    let mut integrator = Dop853::new(&sys, 0.0, [1.0, 0.0, 0.0, 1.0], cfg.tolerances());
    // Accumulated upper-triangular factor [r11, r12, r22].
    let mut r_acc = [1.0, 0.0, 1.0];
    let mut log_det = 0.0;
    let mut q = [[1.0, 0.0], [0.0, 1.0]];
    for k in 1..=segments {
        let t = if k == segments { period } else { period * k as f64 / segments as f64 };
        integrator.advance_to(t)?;
        let y = *integrator.state();
        let (q_new, r) = qr2([y[0], y[1]], [y[2], y[3]]);
        log_det += (r[0] * r[2]).ln();
        r_acc = [r[0] * r_acc[0], r[0] * r_acc[1] + r[1] * r_acc[2], r[2] * r_acc[2]];
        q = q_new;
        if k < segments {
            integrator.reset_state([q[0][0], q[0][1], q[1][0], q[1][1]]);
        }
    }
    // M = Q R with Q given by its columns.
    let matrix = [
        [q[0][0] * r_acc[0], q[0][0] * r_acc[1] + q[1][0] * r_acc[2]],
        [q[0][1] * r_acc[0], q[0][1] * r_acc[1] + q[1][1] * r_acc[2]],
    ];
    Ok(Monodromy { matrix, log_det, det_sign: 1.0, period })
}

/// Multipliers and exponents of a monodromy matrix.
///
/// `lambda_min` is taken from the exact sum `lambda_max + lambda_min =
/// -gamma/m` rather than from the small eigenvalue, which underflows for
/// small `m`.
pub fn floquet_exponents(mono: &Monodromy, params: &MathieuParams) -> Result<FloquetResult> {
    params.ensure_valid()?;
    let period = params.period();
    let m = &mono.matrix;
    let trace = m[0][0] + m[1][1];
    let det = mono.det();
    let disc = trace * trace - 4.0 * det;
    if disc < 0.0 {
        return Err(Error::ComplexMultipliers { discriminant: disc });
    }
    // Larger-magnitude root first, the other from the product to avoid
    // cancellation.
    let rho1 = 0.5 * (trace + trace.signum() * disc.sqrt());
    let rho2 = if rho1 != 0.0 { det / rho1 } else { 0.0 };
    if rho1 <= 0.0 {
        let lambda_max = rho1.abs().ln() / period;
        return Err(Error::NegativeMultiplier { lambda_max, lambda_min: mono.log_det / period - lambda_max });
    }
    let lambda_max = rho1.ln() / period;
    let lambda_min = -params.gamma / params.m - lambda_max;
    let abel_residual = if mono.det_sign > 0.0 {
        (mono.log_det + params.gamma * period / params.m).exp_m1().abs()
    } else {
        f64::INFINITY
    };
    Ok(FloquetResult {
        monodromy: mono.matrix,
        log_det: mono.log_det,
        multipliers: [rho1, rho2],
        lambda_max,
        lambda_min,
        period,
        abel_residual,
    })
}

/// Monodromy matrix and exponents in one call.
pub fn floquet(params: &MathieuParams, cfg: &IntegratorConfig) -> Result<FloquetResult> {
    let mono = monodromy_matrix(params, cfg)?;
    floquet_exponents(&mono, params)
}

/// Eigenvector of the 2x2 matrix for eigenvalue `rho`, with positive
/// x-component.
fn eigenvector(m: &Mat2, rho: f64) -> [f64; 2] {
    let a = [m[0][1], rho - m[0][0]];
    let b = [rho - m[1][1], m[1][0]];
    let v = if a[0].hypot(a[1]) >= b[0].hypot(b[1]) { a } else { b };
    let norm = v[0].hypot(v[1]);
    let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
    if norm == 0.0 {
        // Scalar matrix: every vector is an eigenvector.
        return [1.0, 0.0];
    }
    [sign * v[0] / norm, sign * v[1] / norm]
}

/// Samples the periodic factor of the Floquet solution for `branch` on a
/// uniform grid of `grid_len` points over one period.
///
/// The max branch is launched from the dominant eigenvector of the
/// monodromy matrix. The min branch is found by integrating the equation
/// for `P` backward in time, where the other mode decays, until it has
/// settled onto the periodic solution. Both are scaled so that
/// `P(0) = (gamma^2/4 + m epsilon)^{-1/4}`.
pub fn periodic_part(
    params: &MathieuParams,
    result: &FloquetResult,
    branch: PeriodicBranch,
    grid_len: usize,
    cfg: &IntegratorConfig,
) -> Result<PeriodicPart> {
    params.ensure_valid()?;
    cfg.validate()?;
    check_stiffness(params, cfg)?;
    if grid_len < 2 {
        return Err(Error::InvalidConfig(format!("grid_len must be at least 2, got {grid_len}")));
    }
    let f0 = params.liouville_coefficient(0.0);
    if !(f0 > 0.0) {
        return Err(Error::NormalizationUndefined { value: f0 });
    }
    let period = params.period();
    let grid = uniform_grid(period, grid_len);
    let raw: Vec<f64> = match branch {
        PeriodicBranch::Max => {
            let lambda = result.lambda_max;
            let v = eigenvector(&result.monodromy, result.multipliers[0]);
            let sys = MathieuSystem::new(*params);
            let (segments, _) = solve(&sys, 0.0, v, period, period, cfg)?;
            grid.iter().map(|&t| sample_segments(&segments, t)[0] * (-lambda * t).exp()).collect()
        }
        PeriodicBranch::Min => {
            let (lambda_max, lambda) = (result.lambda_max, result.lambda_min);
            let sys = ShiftedSystem { params: *params, lambda, constant: -params.m * lambda * lambda_max };
            let spread = (lambda_max - lambda) * period;
            let burn_in = ((BURN_IN_DECAY / spread).ceil() as usize).clamp(1, MAX_BURN_IN_PERIODS);
            let start = period * (burn_in + 1) as f64;
            let (_, settled) = solve(&sys, start, [1.0, 0.0], period, period, cfg)?;
            let (segments, _) = solve(&sys, period, settled, 0.0, period, cfg)?;
            grid.iter().map(|&t| sample_segments(&segments, t)[0]).collect()
        }
    };
    let normalization = f0.powf(-0.25) / raw[0];
    if !normalization.is_finite() {
        return Err(Error::NonPeriodic { residual: f64::INFINITY });
    }
    let values = raw.iter().map(|v| v * normalization).collect();
    let part = PeriodicPart { grid, values, normalization, branch };
    let residual = part.periodicity_residual();
    if !(residual <= PERIODICITY_TOL) {
        return Err(Error::NonPeriodic { residual });
    }
    Ok(part)
}
