//! First-order WKB approximations in Olver form for `u = 1/m` and
//! `f(t) = gamma^2/4 + m epsilon cos(omega t)`: phase integrals, the
//! approximate fundamental solutions, their error envelopes, and the
//! resulting predictions for exponents and periodic parts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{uniform_grid, MathieuParams, PeriodicBranch, PeriodicPart};
use crate::numerics::quadrature;

const QUAD_ABS_TOL: f64 = 1e-15;
const QUAD_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMethod {
    /// Adaptive Gauss–Kronrod quadrature of `sqrt(f)`.
    Quadrature,
    /// Second-order expansion of `sqrt(f)` in `m`, integrated exactly.
    Taylor,
}

impl fmt::Display for PhaseMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseMethod::Quadrature => f.write_str("quadrature"),
            PhaseMethod::Taylor => f.write_str("taylor"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WkbBranch {
    Grow,
    Decay,
}

/// Fails with the location of the smallest `f` when `f` is not positive
/// everywhere.
pub fn check_no_turning_point(params: &MathieuParams) -> Result<()> {
    params.ensure_valid()?;
    if params.wkb_valid() {
        return Ok(());
    }
    let t = if params.epsilon >= 0.0 { std::f64::consts::PI / params.omega } else { 0.0 };
    Err(Error::TurningPoint { t, value: params.liouville_coefficient(t) })
}

/// `(1/m) int_0^t sqrt(f(s)) ds`.
pub fn phase_integral(params: &MathieuParams, t: f64, method: PhaseMethod) -> Result<f64> {
    check_no_turning_point(params)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig(format!("phase integral needs t >= 0, got {t}")));
    }
    Ok(phase_unchecked(params, t, method))
}

fn phase_unchecked(p: &MathieuParams, t: f64, method: PhaseMethod) -> f64 {
    match method {
        PhaseMethod::Quadrature => {
            quadrature::integrate(|s| p.liouville_coefficient(s).sqrt(), 0.0, t, QUAD_ABS_TOL, QUAD_REL_TOL) / p.m
        }
        PhaseMethod::Taylor => {
            let g3 = p.gamma.powi(3);
            let wt = p.omega * t;
            (0.5 * p.gamma * t + p.m * p.epsilon * wt.sin() / (p.gamma * p.omega)
                - p.m * p.m * p.epsilon * p.epsilon / (2.0 * g3) * (t + (2.0 * wt).sin() / (2.0 * p.omega)))
                / p.m
        }
    }
}

/// `ln` of the approximate solution at `t`, with the damping factor
/// `e^{-gamma t/2m}` folded in before exponentiating.
fn log_fundamental(p: &MathieuParams, t: f64, branch: WkbBranch, method: PhaseMethod) -> f64 {
    let amplitude = -0.25 * p.liouville_coefficient(t).ln();
    let damping = p.gamma * t / (2.0 * p.m);
    match (branch, method) {
        // The closed form lets the leading phase cancel the damping exactly.
        (WkbBranch::Grow, PhaseMethod::Taylor) => {
            let wt = p.omega * t;
            amplitude + p.epsilon * wt.sin() / (p.gamma * p.omega)
                - p.m * p.epsilon * p.epsilon / (2.0 * p.gamma.powi(3)) * (t + (2.0 * wt).sin() / (2.0 * p.omega))
        }
        (WkbBranch::Grow, _) => amplitude + phase_unchecked(p, t, method) - damping,
        (WkbBranch::Decay, _) => amplitude - phase_unchecked(p, t, method) - damping,
    }
}

/// `f^{-1/4} exp(+-phase - gamma t/2m)` on `grid`.
pub fn wkb_fundamental(
    params: &MathieuParams,
    grid: &[f64],
    branch: WkbBranch,
    method: PhaseMethod,
) -> Result<Vec<f64>> {
    check_no_turning_point(params)?;
    if let Some(&t) = grid.iter().find(|&&t| !(t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidConfig(format!("grid times must be >= 0, got {t}")));
    }
    Ok(grid.iter().map(|&t| log_fundamental(params, t, branch, method).exp()).collect())
}

/// Leading-order exponents `(-m epsilon^2/(2 gamma^3), -gamma/m)`.
pub fn wkb_exponents(params: &MathieuParams) -> (f64, f64) {
    let p = params;
    (-p.m * p.epsilon * p.epsilon / (2.0 * p.gamma.powi(3)), -p.gamma / p.m)
}

/// `f(t)^{-1/4} exp(+-epsilon sin(omega t)/(gamma omega))` on `grid`.
pub fn wkb_periodic(params: &MathieuParams, grid: &[f64], branch: PeriodicBranch) -> Result<PeriodicPart> {
    check_no_turning_point(params)?;
    let p = params;
    let sign = match branch {
        PeriodicBranch::Max => 1.0,
        PeriodicBranch::Min => -1.0,
    };
    let values = grid
        .iter()
        .map(|&t| {
            let log =
                -0.25 * p.liouville_coefficient(t).ln() + sign * p.epsilon * (p.omega * t).sin() / (p.gamma * p.omega);
            log.exp()
        })
        .collect();
    Ok(PeriodicPart { grid: grid.to_vec(), values, normalization: 1.0, branch })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WkbPrediction {
    pub lambda_max_pred: f64,
    pub lambda_min_pred: f64,
    pub p_max_pred: PeriodicPart,
    pub p_min_pred: PeriodicPart,
    pub phase_method: PhaseMethod,
}

/// All leading-order predictions on a uniform grid of `grid_len` points.
pub fn predict(params: &MathieuParams, grid_len: usize, phase_method: PhaseMethod) -> Result<WkbPrediction> {
    check_no_turning_point(params)?;
    if grid_len < 2 {
        return Err(Error::InvalidConfig(format!("grid_len must be at least 2, got {grid_len}")));
    }
    let grid = uniform_grid(params.period(), grid_len);
    let (lambda_max_pred, lambda_min_pred) = wkb_exponents(params);
    Ok(WkbPrediction {
        lambda_max_pred,
        lambda_min_pred,
        p_max_pred: wkb_periodic(params, &grid, PeriodicBranch::Max)?,
        p_min_pred: wkb_periodic(params, &grid, PeriodicBranch::Min)?,
        phase_method,
    })
}

/// `g = f^{-1/4}`.
pub fn inverse_quarter_root(params: &MathieuParams, t: f64) -> f64 {
    params.liouville_coefficient(t).powf(-0.25)
}

/// `g'' = (5/16) f^{-9/4} f'^2 - (1/4) f^{-5/4} f''` for `g = f^{-1/4}`.
pub fn inverse_quarter_root_second_derivative(params: &MathieuParams, t: f64) -> f64 {
    let p = params;
    let wt = p.omega * t;
    let f = p.liouville_coefficient(t);
    let df = -p.m * p.epsilon * p.omega * wt.sin();
    let d2f = -p.m * p.epsilon * p.omega * p.omega * wt.cos();
    0.3125 * f.powf(-2.25) * df * df - 0.25 * f.powf(-1.25) * d2f
}

/// Olver error-control integrals and the bounds derived from them at one
/// time `t` within a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    /// `int_0^t g |g''|`.
    pub f1: f64,
    /// `int_t^T g |g''|`.
    pub f2: f64,
    /// `e^{F_1}/(2u) - 1` with `u = 1/m`. Can be negative.
    pub eps_bound_1: f64,
    /// `e^{F_2}/(2u) - 1`. Can be negative.
    pub eps_bound_2: f64,
    /// `e^{F_1/u} - 1`, the bound in its usual scaling.
    pub eps_bound_1_alt: f64,
    /// `e^{F_2/u} - 1`.
    pub eps_bound_2_alt: f64,
    /// `e^{5 |epsilon| omega m^2 t/(2 gamma^3)} - 1`.
    pub delta_bound: f64,
}

pub fn olver_error_envelope(params: &MathieuParams, t: f64, horizon: f64) -> Result<ErrorEnvelope> {
    check_no_turning_point(params)?;
    if !(0.0 <= t && t <= horizon && horizon.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "envelope needs 0 <= t <= horizon, got t = {t}, horizon = {horizon}"
        )));
    }
    let p = params;
    let integrand = |s: f64| inverse_quarter_root(p, s) * inverse_quarter_root_second_derivative(p, s).abs();
    let f1 = quadrature::integrate(integrand, 0.0, t, QUAD_ABS_TOL, QUAD_REL_TOL);
    let f2 = quadrature::integrate(integrand, t, horizon, QUAD_ABS_TOL, QUAD_REL_TOL);
    let delta_exponent = 5.0 * p.epsilon.abs() * p.omega * p.m * p.m * t / (2.0 * p.gamma.powi(3));
    Ok(ErrorEnvelope {
        f1,
        f2,
        eps_bound_1: 0.5 * p.m * f1.exp() - 1.0,
        eps_bound_2: 0.5 * p.m * f2.exp() - 1.0,
        eps_bound_1_alt: (p.m * f1).exp_m1(),
        eps_bound_2_alt: (p.m * f2).exp_m1(),
        delta_bound: delta_exponent.exp_m1(),
    })
}
