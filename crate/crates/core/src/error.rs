use thiserror::Error;

/// Errors raised by the numerical routines and the sweep harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("stiffness guard tripped: gamma/(m*omega) = {ratio:.3e} exceeds {limit:.0e}; enable stiff mode")]
    StiffnessGuard { ratio: f64, limit: f64 },

    #[error("step size underflow at t = {t}: |h| = {h:e} below min_step")]
    StepUnderflow { t: f64, h: f64 },

    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded { max_steps: usize, t: f64 },

    #[error("monodromy matrix has complex multipliers (discriminant {discriminant:e})")]
    ComplexMultipliers { discriminant: f64 },

    /// Both multipliers are real and negative. The real parts of the
    /// exponents, `ln|rho|/T`, are still reported.
    #[error("negative Floquet multipliers (real parts: lambda_max = {lambda_max}, lambda_min = {lambda_min})")]
    NegativeMultiplier { lambda_max: f64, lambda_min: f64 },

    #[error("periodic part failed the endpoint check: |P(T) - P(0)| / max|P| = {residual:e}")]
    NonPeriodic { residual: f64 },

    #[error("periodic-part normalization undefined: gamma^2/4 + m*epsilon = {value} is not positive")]
    NormalizationUndefined { value: f64 },

    #[error("zero pivot in truncated Hill matrix at row {row}")]
    SingularTruncation { row: usize },

    #[error("Hill determinant did not converge before n = {n}")]
    NoConvergence { n: usize },

    #[error("arccosh argument {argument} < 1; Delta(0) = {delta0} admits no real exponent")]
    DomainError { delta0: f64, argument: f64 },

    #[error("turning point: gamma^2/4 + m*epsilon*cos(omega*t) = {value:e} <= 0 at t = {t}")]
    TurningPoint { t: f64, value: f64 },

    #[error("log-log fit needs at least 3 usable points, got {usable}")]
    InsufficientPoints { usable: usize },

    #[error("every sweep point failed")]
    AllPointsFailed,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
