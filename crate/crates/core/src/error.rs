use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimensions {rows}x{cols} do not match the operation")]
    DimensionMismatch { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("target state norm is {norm}, expected 1")]
    UnnormalizedTarget { norm: f64 },
    #[error("density matrix violates Hermiticity (max deviation {deviation:e})")]
    HermiticityViolation { deviation: f64 },
    #[error("density matrix trace is {trace}, expected 1")]
    TraceViolation { trace: f64 },
    #[error("density matrix has negative eigenvalue {eigenvalue:e}")]
    PositivityViolation { eigenvalue: f64 },
    #[error("parameter `{name}` = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(&'static str),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("no coincidence table for phase setting ({phi_xx:.4}, {phi_x:.4})")]
    MissingRun { phi_xx: f64, phi_x: f64 },
    #[error("projection {0} has zero exposure")]
    EmptyProjection(&'static str),
    #[error("required cell group has zero counts")]
    EmptyCells,
}

pub type Result<T> = core::result::Result<T, Error>;
