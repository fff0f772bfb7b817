//! Multiobjectivization toolkit for continuous single-objective optimization.
//!
//! A single-objective problem `f1` is turned into a bi-objective one by
//! adding a sphere objective `f2(x) = sum_i (x_i - s_i)^2` centered at a
//! chosen point `s`. Local optima of `f1` become locally efficient sets of
//! the pair `(f1, f2)`, and those sets are connected through ridges that a
//! gradient-sliding solver can cross. The crate provides:
//!
//! * [`problems`] — an evaluable test-function suite with analytic and
//!   finite-difference gradients plus seeded instance transforms,
//! * [`biobj`] — the sphere helper objective, normalized multi-objective
//!   gradients and the anti-parallelism efficiency test,
//! * [`mogsa`] — the two-phase gradient-sliding solver (descend to an
//!   efficient set, explore it along each objective, cross ridges),
//! * [`neldermead`] — a simplex baseline, also used as MOGSA's local refiner,
//! * [`landscape`] — gradient-field grids with basin labels and ridge
//!   detection for heatmap export,
//! * [`bench`] — target lists, first-hit run logs and ECDF aggregation,
//! * [`cli`] — the `somogsa` command-line front end.
//!
//! See the crate `examples/` directory for runnable end-to-end walkthroughs.

pub mod bench;
pub mod biobj;
pub mod cli;
pub mod landscape;
pub mod mogsa;
pub mod neldermead;
pub mod problems;

pub(crate) mod vecmath;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("problem '{0}' has no analytic gradient")]
    NoAnalyticGradient(String),
    #[error("point {0:?} is outside the feasible bounds")]
    OutOfBounds(Vec<f64>),
    #[error("rotation matrix is not orthonormal (max deviation {0:.3e})")]
    NonOrthonormalRotation(f64),
    #[error("zero-length vector has no direction")]
    ZeroVector,
    #[error("bisection endpoints do not bracket an efficient set")]
    NonBracketing,
    #[error("non-finite value {value} encountered at {x:?}")]
    NonFinite { x: Vec<f64>, value: f64 },
    #[error("unknown problem id '{0}'")]
    UnknownProblem(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("budget too small: need at least {0} evaluations")]
    BudgetTooSmall(u64),
    #[error("operation requires dimension 2, got {0}")]
    RequiresDim2(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("failed to parse {what}: {detail}")]
    Parse { what: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
