use alloc::string::String;

use crate::C64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear form has all coefficients zero")]
    ZeroForm,

    #[error("divisor system has {forms} forms, needs at least {needed}")]
    TooFewForms { forms: usize, needed: usize },

    #[error("subset of size {got} given where {expected} forms are required")]
    SubsetSize { expected: usize, got: usize },

    #[error("curve components share a common zero near {at}")]
    CommonZero { at: C64 },

    #[error("operation requires the sine_symmetric family")]
    WrongFamily,

    #[error("point {z} lies outside the disc D({center}, {radius})")]
    OutsideDisc { z: C64, center: C64, radius: f64 },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("zero of P∘F on the contour |z - {center}| = {radius} (relative modulus {modulus:e})")]
    ZeroOnContour { center: C64, radius: f64, modulus: f64 },

    #[error("measure of the central disc D(0, {radius}) is zero")]
    ZeroCentralMass { radius: f64 },

    #[error("annulus mass {mass:e} is below the selection threshold")]
    EmptyAnnulus { mass: f64 },

    #[error("disc selection certificate failed after {rounds} refinement rounds: {detail}")]
    CertificateFailed { rounds: usize, detail: String },

    #[error("covering of D({center}, {radius}) missed the sample point {point}")]
    CoveringFailed { center: C64, radius: f64, point: C64 },
}

impl Error {
    /// True for failures of a numerical procedure rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::ZeroOnContour { .. }
                | Error::CertificateFailed { .. }
                | Error::CoveringFailed { .. }
        )
    }
}
