use thiserror::Error;

/// Failures raised by the ring analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coupling C is zero: the crossing is a step and G(u) is a delta function")]
    ZeroCoupling,

    #[error("ground state is degenerate at u = {u} (gap {gap:e})")]
    DegenerateSpectrum { u: f64, gap: f64 },

    #[error("spectral gap {gap:e} too small for finite differences with step {step:e}")]
    DegeneracyNearby { gap: f64, step: f64 },

    #[error("the dot is decoupled from the lower wire state (c1 == c2 for c0 > 0): the splitting ratio diverges")]
    DegenerateSplitting,

    #[error("dark-state reduction requires c0 == 0 (got c0 = {0})")]
    NonzeroC0(f64),

    #[error("c0 == 0: no metamorphosis, the ground state stays in the bright wire state")]
    ZeroC0,

    #[error("c1 == c2 == 0: the dot is decoupled from the wire")]
    ZeroWireCoupling,

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NonHermitianInput(f64),

    #[error("reduced wire Hamiltonian is undefined at u = 0")]
    ZeroPotential,

    #[error("invalid sweep protocol: {0}")]
    InvalidProtocol(String),

    #[error("non-finite parameter: {0}")]
    NonFinite(&'static str),

    #[error("adaptive step fell below {floor:e} at t = {t}")]
    StepUnderflow { t: f64, floor: f64 },

    #[error("norm drift {drift:e} at t = {t} exceeds {limit:e}")]
    NormDrift { t: f64, drift: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
