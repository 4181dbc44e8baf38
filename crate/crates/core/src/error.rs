use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("capacity must be positive")]
    InvalidCapacity,
    #[error("item {index}: weight must be positive")]
    NonPositive { index: usize },
    #[error("item {index}: oversized item (weight exceeds capacity)")]
    Oversized { index: usize },
    #[error("item {index}: negative multiplicity")]
    NegativeMultiplicity { index: usize },
    #[error("instance has no items")]
    Empty,
    #[error("common denominator of the sizes does not fit in 64 bits")]
    DenominatorTooLarge,
    #[error("operation needs integral multiplicities")]
    FractionalMultiplicity,
    #[error("solutions refer to different instances")]
    Mismatch,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("pricing capacity {capacity} exceeds the supported limit {limit}; sizes (weights over capacity): {sizes:?}")]
    CapacityTooLarge { capacity: u64, limit: u64, sizes: Vec<u64> },
    #[error("LP gap certificate failed: value {value}, lower bound {lower_bound}")]
    GapNotCertified { value: String, lower_bound: String },
    #[error("simplex failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ColoringError {
    #[error("entropy condition violated: sum {sum} > {bound}")]
    Entropy { sum: f64, bound: f64 },
    #[error("invalid coloring problem: {0}")]
    Invalid(String),
    #[error("coloring failed after {attempts} attempts")]
    Failed { attempts: u32 },
    #[error("only {frozen} coordinates can be frozen, {needed} needed")]
    TooFewFrozen { frozen: usize, needed: usize },
    #[error("post-hoc verification failed: {0}")]
    Verification(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("well-spread loop did not converge in {iterations} rounds; potential trace {potentials:?}")]
    NotConverged { iterations: usize, potentials: Vec<f64> },
}

/// Crate-level error used by the pipeline and baselines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("audit failed at stage {stage}: {detail}")]
    Audit { stage: String, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
