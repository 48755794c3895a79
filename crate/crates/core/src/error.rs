use thiserror::Error;

use crate::hilbert::Level;
use crate::spectra::Label;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis needs at least one atomic level")]
    EmptyLevels,

    #[error("atomic level {0} listed twice")]
    DuplicateLevel(Level),

    #[error("atomic level {0} is not part of the basis")]
    UnknownLevel(Level),

    #[error("no excitation weight defined for level {0}")]
    MissingWeight(Level),

    #[error("{model} model needs levels {expected}, basis has {found}")]
    LevelMismatch {
        model: &'static str,
        expected: String,
        found: String,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {asymmetry:.3e})")]
    NonHermitian { asymmetry: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("closed-form expression outside its domain: {0}")]
    FormulaDomain(String),

    #[error(
        "ambiguous label continuation at ramp step {step}/{steps}: {first} and {second} \
         compete (overlaps {overlap_first:.6} vs {overlap_second:.6})"
    )]
    AmbiguousLabel {
        step: usize,
        steps: usize,
        first: String,
        second: String,
        overlap_first: f64,
        overlap_second: f64,
    },

    #[error("label {0} not present in spectrum")]
    UnknownLabel(Label),

    #[error("excitation cutoff {cutoff} too small, need at least {required}")]
    SubspaceTooSmall { cutoff: usize, required: usize },

    #[error("state is not normalized (norm = {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("norm drift {drift:.3e} exceeds gate {gate:.1e}; tighten the tolerance (tol = {tol:.1e})")]
    NormDrift { drift: f64, gate: f64, tol: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("step limit {max_steps} reached at t = {t}")]
    TooManySteps { max_steps: usize, t: f64 },

    #[error("Fock truncation violated: top-level occupation {occupation:.3e} > {threshold:.1e}")]
    Truncation { occupation: f64, threshold: f64 },
}
