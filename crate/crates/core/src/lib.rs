//! Computational toolkit for hyperbolic Dehn filling near the complete structure.
//!
//! The crate works in the analytic chart `v_i = (1/2) dΦ/du_i` of a cusped
//! manifold's deformation space, given by its Neumann–Zagier potential `Φ`
//! truncated at a finite degree. On top of that chart it provides:
//!
//! - [`manifold`]: descriptor model and JSON ingestion,
//! - [`series`]: multivariate truncated power series,
//! - [`filling`]: Newton solver for the Dehn filling equations, core-geodesic
//!   holonomies and coefficient scans,
//! - [`volume`]: pseudo complex volumes modulo `iπ²`,
//! - [`relations`]: lattice-reduction integer relations, Weil heights,
//!   symmetry and quadraticity tests,
//! - [`anomaly`]: exact rank classifications of exponent lattices,
//! - [`tube`]: tube volumes, boundary tori and modular reduction,
//! - [`acceptance`]: the desk-scale verification suite.

pub mod acceptance;
pub mod anomaly;
pub mod filling;
pub mod fixtures;
pub mod manifold;
pub mod relations;
pub mod scalar;
pub mod series;
pub mod tube;
pub mod volume;

pub use filling::{FillingCoefficient, FillingSolution, SolverOptions};
pub use manifold::{CuspShape, DecimalComplex, ManifoldDescriptor, NzPotential};
pub use scalar::{ComplexScalar, HpComplex, Precision};
pub use series::{MultiIndex, TruncatedSeries};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid {field}: {reason}")]
    Invariant { field: String, reason: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("index {index} out of range for {len} variables")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian at iteration {0}")]
    SingularJacobian(usize),
    #[error("elliptic solution: ||t_{cusp}| - 1| = {gap:e}")]
    Elliptic { cusp: usize, gap: f64 },
    #[error("descriptor has no complex volume")]
    MissingVolume,
    #[error("precision {0} digits is too low for a meaningful relation search")]
    PrecisionTooLow(u32),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("matrix has rank {0}, expected 2")]
    RankDeficient(usize),
    #[error("lattice is not anomalous: Jacobian rank is {0}")]
    NotAnomalous(usize),
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("empty range: {0}")]
    EmptyRange(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invariant(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Invariant {
        field: field.into(),
        reason: reason.into(),
    }
}
