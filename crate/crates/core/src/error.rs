use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance after {subdivisions} subdivisions (estimated error {err:e})")]
    NonConvergence { subdivisions: usize, err: f64 },

    #[error("integrand returned a non-finite value at t = {re} + {im}i")]
    SingularIntegrand { re: f64, im: f64 },

    #[error("derivative of the phase polynomial vanishes identically")]
    Degenerate,

    #[error("degenerate saddle: |phi''| = {0:e}")]
    DegenerateSaddle(f64),

    #[error("degenerate denominator in exit-point formula: {0:e}")]
    DegenerateDenominator(f64),

    #[error("zero amplitude: |G| = {0:e}")]
    ZeroAmplitude(f64),

    #[error("proper-time inversion failed: {0}")]
    InversionFailure(String),

    #[error("invalid contour: {0}")]
    InvalidContour(String),
}

pub type Result<T> = std::result::Result<T, Error>;
