use thiserror::Error;

/// Errors produced by the estimators, the perturbation builder and the
/// experiment drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate system: numerical null space of the Hankel matrix has dimension {0}")]
    DegenerateSystem(usize),

    #[error("repeated roots: recovered nodes {0} and {1} coincide")]
    RepeatedRoots(usize, usize),

    #[error("rank deficiency: singular value {value:e} below {threshold:e}")]
    RankDeficiency { value: f64, threshold: f64 },

    #[error("eigenvalue solver did not converge")]
    EigenFailure,

    #[error("near-coincident nodes: minimal gap {0:e}")]
    NearCoincidentNodes(f64),

    #[error("epsilon too large: {0}")]
    EpsilonTooLarge(String),

    #[error("empty admissible set")]
    EmptyAdmissibleSet,

    #[error("insufficient data: {found} points, need at least {needed}")]
    InsufficientData { found: usize, needed: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
