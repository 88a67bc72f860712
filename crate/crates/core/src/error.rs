use thiserror::Error;

/// Errors raised by field construction, the engines and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("harmonic indices {0} and {1} are not coprime")]
    NonCoprimeIndices(u32, u32),
    #[error("fundamental frequency must be positive and finite, got {0}")]
    NonPositiveFrequency(f64),
    #[error("harmonic index must be >= 1 (a zero-frequency component would bias the field)")]
    ZeroHarmonic,
    #[error("harmonic index {0} appears more than once")]
    DuplicateHarmonic(u32),
    #[error("field has no components")]
    EmptyField,
    #[error("drive component at frequency {0} is resonant with the oscillator")]
    ResonantComponent(f64),
    #[error("ensemble size must be even and >= 2, got {0}")]
    OddSampleCount(usize),
    #[error("time step {dt} exceeds the limit {limit} (period / 200)")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("non-finite phase-space coordinate at t = {0}")]
    NonFiniteState(f64),
    #[error("box too small for the requested state: {0}")]
    BoxTooSmall(String),
    #[error("imaginary-time relaxation did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("the cosine lattice is unbound; quantum propagation requires a confining potential")]
    UnboundPotential,
    #[error("norm drifted to {norm} at t = {t}")]
    NormDrift { norm: f64, t: f64 },
    #[error("boundary occupancy {occupancy:e} exceeds 1e-6 at t = {t}")]
    BoundaryContamination { occupancy: f64, t: f64 },
    #[error("phase scans need a field with exactly two components")]
    NotBichromatic,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of a numerical contract during propagation, as
    /// opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteState(_)
                | Error::NoConvergence(_)
                | Error::NormDrift { .. }
                | Error::BoundaryContamination { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
