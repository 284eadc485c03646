//! Floquet decomposition of the damped Mathieu equation
//! `m x'' + gamma x' - epsilon cos(omega t) x = 0` by three routes: direct
//! monodromy integration, Hill's infinite determinant, and first-order WKB
//! asymptotics, plus a harness that measures how fast they agree as
//! `m -> 0`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod hill;
pub mod model;
pub mod monodromy;
pub mod numerics;
pub mod study;
pub mod wkb;

pub use error::{Error, Result};
pub use model::{
    uniform_grid, validate, FloquetResult, HillPath, HillResult, MathieuParams, PeriodicBranch, PeriodicPart,
    ValidityReport, Violation, DEFAULT_GRID_LEN,
};
pub use monodromy::{floquet, floquet_exponents, integrate, monodromy_matrix, periodic_part, IntegratorConfig};
pub use study::{fit_loglog, sweep, ConvergenceReport, Quantity, SweepConfig};
