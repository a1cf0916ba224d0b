use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Hamiltonian parameters: {}", join_violations(.0))]
    InvalidParams(Vec<Violation>),

    #[error("invalid pulse profile: {0}")]
    InvalidPulse(String),

    #[error("time {t} outside the pulse domain [0, {end}]")]
    DomainExceeded { t: f64, end: f64 },

    #[error("duration must be positive, got {0}")]
    NonpositiveDuration(f64),

    #[error("energy must be positive, got {0}")]
    NonpositiveEnergy(f64),

    #[error("wavelength must be positive, got {0}")]
    NonpositiveWavelength(f64),

    #[error("rotation angle {0} outside [0, π/2]")]
    AlphaOutOfRange(f64),

    #[error("phase shift must be finite and nonnegative, got {0}")]
    InvalidTheta(f64),

    #[error("minus branch is not admissible for θ = {0} (needs θ mod 2π ≥ π)")]
    BranchInadmissible(f64),

    #[error("state is not normalized: |a1|² + |a2|² = {0}")]
    UnnormalizedState(f64),

    #[error("step count must be at least 1")]
    ZeroSteps,

    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),

    #[error("no candidate within the fidelity tolerance after {samples} samples")]
    NoFeasibleCandidate { samples: u64 },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
