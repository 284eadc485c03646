//! Convergence sweeps over the mass: per-point errors against the
//! leading-order predictions, log-log rate fits and report output.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hill::{self, DEFAULT_HILL_TOL};
use crate::model::{uniform_grid, MathieuParams, PeriodicBranch, DEFAULT_GRID_LEN};
use crate::monodromy::{self, IntegratorConfig};
use crate::numerics::kahan::KahanSum;
use crate::wkb;

pub const DEFAULT_M_MIN: f64 = 0.005;
pub const DEFAULT_M_MAX: f64 = 0.32;
pub const DEFAULT_POINTS: usize = 16;

/// The error measured at each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `|lambda_max - (-m epsilon^2/(2 gamma^3))|`, monodromy exponent.
    ExponentMax,
    /// `|lambda_min - (-gamma/m)|` with `lambda_min = -gamma/m - lambda_max`.
    ExponentMin,
    /// `|(1 - Delta(0)) - m pi epsilon^2/(gamma^3 omega)|`.
    Delta0Deficit,
    /// Sup-norm distance of the numerical `P_max` from its prediction.
    PeriodicMax,
    PeriodicMin,
    /// `|1 - det M_3|`.
    TruncatedDet,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::ExponentMax,
        Quantity::ExponentMin,
        Quantity::Delta0Deficit,
        Quantity::PeriodicMax,
        Quantity::PeriodicMin,
        Quantity::TruncatedDet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::ExponentMax => "exponent_max",
            Quantity::ExponentMin => "exponent_min",
            Quantity::Delta0Deficit => "delta0_deficit",
            Quantity::PeriodicMax => "periodic_max",
            Quantity::PeriodicMin => "periodic_min",
            Quantity::TruncatedDet => "truncated_det",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Numerical settings shared by every sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSettings {
    pub integrator: IntegratorConfig,
    pub hill_tol: f64,
    pub grid_len: usize,
}

impl Default for PointSettings {
    fn default() -> Self {
        Self { integrator: IntegratorConfig::default(), hill_tol: DEFAULT_HILL_TOL, grid_len: DEFAULT_GRID_LEN }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// `m` is ignored.
    pub base: MathieuParams,
    pub m_values: Vec<f64>,
    pub quantity: Quantity,
    pub settings: PointSettings,
    pub out_format: OutputFormat,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: MathieuParams { m: 1.0, gamma: 1.0, epsilon: 1.0, omega: 1.0 },
            m_values: log_spaced(DEFAULT_M_MIN, DEFAULT_M_MAX, DEFAULT_POINTS),
            quantity: Quantity::ExponentMax,
            settings: PointSettings::default(),
            out_format: OutputFormat::Csv,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() {
            return Err(Error::InvalidConfig("m_values is empty".into()));
        }
        if let Some(m) = self.m_values.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidConfig(format!("m values must be positive, got {m}")));
        }
        let mut sorted = self.m_values.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("m values must be distinct".into()));
        }
        self.base.with_m(sorted[0]).ensure_valid()?;
        self.settings.integrator.validate()?;
        if !(self.settings.hill_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("hill_tol must be positive, got {}", self.settings.hill_tol)));
        }
        if self.settings.grid_len < 2 {
            return Err(Error::InvalidConfig(format!("grid_len must be at least 2, got {}", self.settings.grid_len)));
        }
        Ok(())
    }
}

/// `points` logarithmically spaced values from `max` down to `min`.
pub fn log_spaced(min: f64, max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 1 && min > 0.0 && max >= min, "bad log-spaced range");
    if points == 1 {
        return vec![min];
    }
    let (lo, hi) = (min.ln(), max.ln());
    let last = (points - 1) as f64;
    (0..points)
        .map(|k| match k {
            0 => max,
            k if k + 1 == points => min,
            k => (hi - (hi - lo) * k as f64 / last).exp(),
        })
        .collect()
}

/// Error at one sweep point plus a short description of how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct PointValue {
    pub error: f64,
    pub detail: String,
}

/// Computes the error of `quantity` at `params`.
pub fn point_error(quantity: Quantity, params: &MathieuParams, settings: &PointSettings) -> Result<PointValue> {
    params.ensure_valid()?;
    let p = params;
    match quantity {
        Quantity::ExponentMax | Quantity::ExponentMin => {
            let result = monodromy::floquet(p, &settings.integrator)?;
            let (max_pred, min_pred) = wkb::wkb_exponents(p);
            if quantity == Quantity::ExponentMax {
                Ok(PointValue {
                    error: (result.lambda_max - max_pred).abs(),
                    detail: format!("monodromy lambda_max={:e}", result.lambda_max),
                })
            } else {
                Ok(PointValue {
                    error: (result.lambda_min - min_pred).abs(),
                    detail: format!("abel lambda_min={:e}", result.lambda_min),
                })
            }
        }
        Quantity::Delta0Deficit => {
            let d = hill::delta0(p, settings.hill_tol)?;
            let leading = p.m * PI * p.epsilon * p.epsilon / (p.gamma.powi(3) * p.omega);
            Ok(PointValue {
                error: (d.deficit - leading).abs(),
                detail: format!("hill n={} deficit={:e}", d.truncation_n, d.deficit),
            })
        }
        Quantity::TruncatedDet => {
            let deficit = hill::det_truncated_deficit(p, 1);
            Ok(PointValue { error: deficit.abs(), detail: "hill n=1".into() })
        }
        Quantity::PeriodicMax | Quantity::PeriodicMin => {
            let branch = if quantity == Quantity::PeriodicMax { PeriodicBranch::Max } else { PeriodicBranch::Min };
            wkb::check_no_turning_point(p)?;
            let result = monodromy::floquet(p, &settings.integrator)?;
            let numeric = monodromy::periodic_part(p, &result, branch, settings.grid_len, &settings.integrator)?;
            let grid = uniform_grid(p.period(), settings.grid_len);
            let predicted = wkb::wkb_periodic(p, &grid, branch)?;
            Ok(PointValue {
                error: numeric.sup_distance(&predicted),
                detail: format!("monodromy grid={} residual={:e}", settings.grid_len, numeric.periodicity_residual()),
            })
        }
    }
}

/// Short machine-readable tag for a failed point.
pub fn error_flag(err: &Error) -> &'static str {
    match err {
        Error::InvalidParams(_) | Error::InvalidConfig(_) => "invalid",
        Error::StiffnessGuard { .. } => "stiffness_guard",
        Error::StepUnderflow { .. } => "step_underflow",
        Error::MaxStepsExceeded { .. } => "max_steps",
        Error::ComplexMultipliers { .. } => "complex_multipliers",
        Error::NegativeMultiplier { .. } => "negative_multiplier",
        Error::NonPeriodic { .. } => "non_periodic",
        Error::NormalizationUndefined { .. } => "normalization_undefined",
        Error::SingularTruncation { .. } => "singular_truncation",
        Error::NoConvergence { .. } => "no_convergence",
        Error::DomainError { .. } => "domain_error",
        Error::TurningPoint { .. } => "wkb_invalid",
        Error::InsufficientPoints { .. } | Error::AllPointsFailed | Error::Io(_) => "internal",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub m: f64,
    /// `None` for a failed point.
    pub error: Option<f64>,
    /// `"ok"` or the failure tag from [`error_flag`].
    pub flag: String,
    pub method_detail: String,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_some()
    }
}

/// Least-squares line through `(ln m, ln error)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    /// Records dropped for a non-positive or non-finite error.
    pub excluded: usize,
}

pub fn fit_loglog(records: &[(f64, f64)]) -> Result<LogLogFit> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|(m, e)| *m > 0.0 && m.is_finite() && *e > 0.0 && e.is_finite())
        .map(|(m, e)| (m.ln(), e.ln()))
        .collect();
    let used = points.len();
    if used < 3 {
        return Err(Error::InsufficientPoints { usable: used });
    }
    let n = used as f64;
    let mean_x = points.iter().map(|p| p.0).collect::<KahanSum>().value() / n;
    let mean_y = points.iter().map(|p| p.1).collect::<KahanSum>().value() / n;
    let sxx = points.iter().map(|p| (p.0 - mean_x).powi(2)).collect::<KahanSum>().value();
    let sxy = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).collect::<KahanSum>().value();
    let syy = points.iter().map(|p| (p.1 - mean_y).powi(2)).collect::<KahanSum>().value();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints { usable: 1 });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).collect::<KahanSum>().value();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(LogLogFit { slope, intercept, r_squared, used, excluded: records.len() - used })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub quantity: Quantity,
    /// Sorted by `m`, ascending.
    pub records: Vec<SweepRecord>,
    /// `None` when fewer than three points were usable.
    pub fit: Option<LogLogFit>,
    pub notes: Vec<String>,
}

impl ConvergenceReport {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn errors(&self) -> Vec<(f64, f64)> {
        self.records.iter().filter_map(|r| r.error.map(|e| (r.m, e))).collect()
    }
}

fn notes_for(quantity: Quantity) -> Vec<String> {
    match quantity {
        Quantity::ExponentMin => {
            vec!["lambda_min is not extracted from the small multiplier: lambda_min = -gamma/m - lambda_max exactly, \
             so lambda_min - (-gamma/m) = -lambda_max and the error recorded here is |lambda_max|, whose leading \
             term is m epsilon^2/(2 gamma^3)"
                .into()]
        }
        Quantity::PeriodicMax | Quantity::PeriodicMin => vec![
            "numerical periodic parts are scaled so that P(0) = (gamma^2/4 + m epsilon)^(-1/4)".into(),
            "points with gamma^2/4 <= m |epsilon| have no prediction and are flagged wkb_invalid".into(),
        ],
        _ => Vec::new(),
    }
}

/// Evaluates every point of the sweep in parallel and fits the rate.
pub fn sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let mut records: Vec<SweepRecord> = config
        .m_values
        .par_iter()
        .map(|&m| match point_error(config.quantity, &config.base.with_m(m), &config.settings) {
            Ok(v) => SweepRecord { m, error: Some(v.error), flag: "ok".into(), method_detail: v.detail },
            Err(e) => SweepRecord { m, error: None, flag: error_flag(&e).into(), method_detail: e.to_string() },
        })
        .collect();
    records.sort_by(|a, b| a.m.total_cmp(&b.m));
    if records.iter().all(|r| !r.is_ok()) {
        return Err(Error::AllPointsFailed);
    }
    let mut notes = notes_for(config.quantity);
    let pairs: Vec<(f64, f64)> = records.iter().filter_map(|r| r.error.map(|e| (r.m, e))).collect();
    let failed = records.len() - pairs.len();
    if failed > 0 {
        notes.push(format!("{failed} flagged point(s) excluded from the fit"));
    }
    let fit = match fit_loglog(&pairs) {
        Ok(fit) => Some(fit),
        Err(e) => {
            notes.push(format!("no fit: {e}"));
            None
        }
    };
    Ok(ConvergenceReport { quantity: config.quantity, records, fit, notes })
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn config_lines(config: &SweepConfig) -> Vec<(String, String)> {
    let s = &config.settings;
    let i = &s.integrator;
    let m_values: Vec<String> = config.m_values.iter().map(|&m| num(m)).collect();
    vec![
        ("quantity".into(), config.quantity.name().into()),
        ("gamma".into(), num(config.base.gamma)),
        ("epsilon".into(), num(config.base.epsilon)),
        ("omega".into(), num(config.base.omega)),
        ("m_values".into(), m_values.join(" ")),
        ("rel_tol".into(), num(i.rel_tol)),
        ("abs_tol".into(), num(i.abs_tol)),
        ("max_steps".into(), i.max_steps.to_string()),
        ("min_step".into(), num(i.min_step)),
        ("stiff".into(), i.stiff.to_string()),
        ("stiff_steps_per_period".into(), i.stiff_steps_per_period.to_string()),
        ("hill_tol".into(), num(s.hill_tol)),
        ("grid_len".into(), s.grid_len.to_string()),
    ]
}

/// CSV with header `m,error,flag,method_detail` and `#` footer lines.
pub fn to_csv(report: &ConvergenceReport, config: &SweepConfig) -> String {
    let mut out = String::from("m,error,flag,method_detail\n");
    for r in &report.records {
        let error = r.error.map_or_else(|| "nan".to_string(), num);
        let detail = r.method_detail.replace(['"', ',', '\n'], " ");
        let _ = writeln!(out, "{},{},{},{}", num(r.m), error, r.flag, detail);
    }
    match report.fit {
        Some(fit) => {
            let _ = writeln!(out, "# slope={}", num(fit.slope));
            let _ = writeln!(out, "# intercept={}", num(fit.intercept));
            let _ = writeln!(out, "# r_squared={}", num(fit.r_squared));
            let _ = writeln!(out, "# used={} excluded={}", fit.used, fit.excluded);
        }
        None => out.push_str("# slope=nan\n# intercept=nan\n# r_squared=nan\n"),
    }
    for note in &report.notes {
        let _ = writeln!(out, "# note: {note}");
    }
    for (key, value) in config_lines(config) {
        let _ = writeln!(out, "# config.{key}={value}");
    }
    out
}

pub fn to_json(report: &ConvergenceReport, config: &SweepConfig) -> String {
    let records: Vec<_> =
        report.records.iter().map(|r| json!({ "m": r.m, "error": r.error, "flag": r.flag })).collect();
    let fit = report.fit.map(|f| {
        json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "r_squared": f.r_squared,
            "used": f.used,
            "excluded": f.excluded,
            "notes": report.notes,
        })
    });
    let value = json!({ "config": config, "records": records, "fit": fit });
    serde_json::to_string_pretty(&value).expect("report is always serializable") + "\n"
}

pub fn render(report: &ConvergenceReport, config: &SweepConfig) -> String {
    match config.out_format {
        OutputFormat::Csv => to_csv(report, config),
        OutputFormat::Json => to_json(report, config),
    }
}
