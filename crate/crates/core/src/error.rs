//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A Jones matrix handed to the SU(2) → SO(3) map was not unitary.
    #[error("Jones matrix is not unitary (residual {residual:.3e} > {tolerance:.1e})")]
    NonUnitaryInput { residual: f64, tolerance: f64 },

    #[error("{sections} DGD sections need {} retarders, got {retarders}", sections + 1)]
    ArityMismatch { sections: usize, retarders: usize },

    /// Frequency step too large for the finite-difference extraction to resolve
    /// the polarization evolution between neighbouring grid points.
    #[error("frequency grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("grid has {got} points, operation needs at least {needed}")]
    InsufficientGrid { needed: usize, got: usize },

    #[error("grid index {index} has no central-difference neighbours in a grid of {len} points")]
    NotInterior { index: usize, len: usize },

    /// Zero-length PMD vector: every state of polarization is principal.
    #[error("PMD vector length {dgd_ps:.3e} ps is below {threshold_ps:.1e} ps, PSPs are undefined")]
    DegeneratePmd { dgd_ps: f64, threshold_ps: f64 },

    #[error("time step subtends {angle:.3e} rad on the sphere (limit {limit} rad)")]
    StepTooLarge { angle: f64, limit: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("neutral state unavailable: {0}")]
    NeutralUnavailable(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}
