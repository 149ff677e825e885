use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("shape mismatch: expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("node error: minimum amplitude {min:.3e} is below the floor {floor:.3e}")]
    Node { min: f64, floor: f64 },

    #[error("winding error: {0}")]
    Winding(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("stability error: {0}")]
    Stability(String),

    #[error("validation error: {0}")]
    Validation(String),
}

impl Error {
    /// Errors caused by inputs rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Grid(_)
                | Error::Shape { .. }
                | Error::Domain(_)
                | Error::Validation(_)
                | Error::Winding(_)
                | Error::Node { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
