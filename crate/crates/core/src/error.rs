use thiserror::Error;

/// Errors surfaced by the library. Every variant maps to a stable
/// machine-readable code (see [`GeomError::code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("tensor rank {0} exceeds the supported maximum of 5")]
    RankOverflow(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("Ricci eigenvalues {0} are not realizable by a left-invariant metric on a unimodular group")]
    NotRealizable(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("eigenvalue multiplicities are only available for families 1 and 4 (got family {0})")]
    UnsupportedMultiplicity(u8),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no distinguishing eigenvalue found below the safety cutoff {cutoff} for pair {pair}")]
    NoWitness { pair: String, cutoff: f64 },
}

impl GeomError {
    pub fn code(&self) -> &'static str {
        match self {
            GeomError::RankOverflow(_) => "rank-overflow",
            GeomError::Shape(_) => "shape-error",
            GeomError::NotRealizable(_) => "not-realizable",
            GeomError::Regime(_) => "regime-error",
            GeomError::UnsupportedMultiplicity(_) => "unsupported-multiplicity",
            GeomError::InvalidArgument(_) => "invalid-argument",
            GeomError::NoWitness { .. } => "no-witness",
        }
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
