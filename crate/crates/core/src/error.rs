use thiserror::Error;

/// Errors raised by the library. Each variant knows which module produced it
/// so front ends can report the origin.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular (determinant 0)")]
    SingularMatrix,
    #[error("pair selection gives a singular kappa matrix")]
    SingularKappa,
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid pair selection: {0}")]
    InvalidSelection(String),
    #[error("coordinate {0} is zero")]
    ZeroCoordinate(usize),
    #[error("branch {branch} out of range (0..{count})")]
    BranchOutOfRange { branch: usize, count: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-removable pole in Gamma({a})/Gamma({b})")]
    Pole { a: String, b: String },
    #[error("arguments {a} and {b} do not differ by an integer")]
    NotIntegerOffset { a: String, b: String },
    #[error("continuation path is near-singular at t={t} (condition number {condition:e})")]
    PathSingular { t: f64, condition: f64 },
    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("degenerate divisor pairing: {0}")]
    DegeneratePairing(String),
    #[error("non-simple pole at z = {point}: {reason}")]
    NonSimplePole { point: String, reason: String },
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Name of the module the error originates from.
    pub fn module(&self) -> &'static str {
        match self {
            Error::SingularMatrix => "intlinalg",
            Error::SingularKappa
            | Error::InvalidSystem(_)
            | Error::InvalidSelection(_)
            | Error::ZeroCoordinate(_)
            | Error::BranchOutOfRange { .. }
            | Error::DimensionMismatch { .. } => "systems",
            Error::Pole { .. } | Error::NotIntegerOffset { .. } => "gamma",
            Error::PathSingular { .. } | Error::NoConvergence(_) => "oracle",
            Error::DegeneratePairing(_) | Error::NonSimplePole { .. } | Error::InvalidCone(_) => {
                "mellinbarnes"
            }
            Error::Parse(_) => "io",
        }
    }

    /// True for failures of a numerical procedure rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PathSingular { .. } | Error::NoConvergence(_) | Error::NonSimplePole { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
