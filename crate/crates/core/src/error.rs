use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("factor label `{0}` appears on both operands")]
    LabelCollision(String),
    #[error("factor label `{0}` is not part of the space")]
    UnknownFactor(String),
    #[error("operands live on different Hilbert spaces: {0}")]
    SpaceMismatch(String),
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),
    #[error("operator is not self-adjoint (max |M - M^dag| = {0:e})")]
    NotSelfAdjoint(f64),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("axis vector has zero length")]
    DegenerateAxis,
    #[error("Bloch vector does not lie on the sphere (|2s| = {0})")]
    NotPure(f64),
    #[error("reservoir size {0} is odd; singlet pairing needs an even count")]
    ReservoirParity(usize),
    #[error("pointer calibration failed: {0}")]
    CalibrationError(String),
    #[error("device `{0}` is not in the READY macrostate")]
    DeviceNotReady(String),
    #[error("configuration error: {0}")]
    ConfigError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
