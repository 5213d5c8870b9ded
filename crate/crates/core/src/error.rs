use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no feasible point: the polytope is empty")]
    InfeasiblePolytope,
    #[error("objective is unbounded over the polytope")]
    Unbounded,
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("zonotope directions do not span R^{0}")]
    DegenerateZonotope(usize),
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point lies outside the window")]
    OutOfWindow,
    #[error("total split rate {0:e} of a cell is below 1e-12")]
    RateUnderflow(f64),
    #[error("matrix has numerical rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },
    #[error("feature matrix has ||A||_2,1 = {0}, expected 1")]
    NotNormalized(f64),
    #[error("isotropic directional distributions cannot be sampled")]
    UnsupportedDistribution,
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
