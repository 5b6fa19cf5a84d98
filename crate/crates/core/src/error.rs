use thiserror::Error;

/// Errors raised by the numerical layers of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no radius r > 0 makes the conformal factor positive and finite: {0}")]
    EmptyDomain(String),

    #[error("r = {r} lies outside the radial domain ({lo}, {hi})")]
    DomainViolation { r: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not reach tolerance: {0}")]
    QuadratureFailure(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("no bounded orbit for E = {energy}, L^2 = {l2}")]
    NoBoundedOrbit { energy: f64, l2: f64 },

    #[error("turning points coincide (circular orbit) for E = {energy}, L^2 = {l2}")]
    DegenerateOrbit { energy: f64, l2: f64 },

    #[error("apsidal ratio {ratio} has no rational approximation with denominator <= {cap}")]
    NotClosedWithinCap { ratio: f64, cap: u32 },

    #[error("no circular orbit at r0 = {r0}: required L^2 = {l2}")]
    NoCircularOrbit { r0: f64, l2: f64 },

    #[error("ill-conditioned radial operator: {0}")]
    IllConditioned(String),

    #[error("eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("spectra differ in length or labels: {0}")]
    LengthMismatch(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid override for preset `{preset}`: {reason}")]
    InvalidOverride { preset: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
