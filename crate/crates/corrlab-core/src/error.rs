use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative mass at cell {index}: {value}")]
    NegativeMass { index: usize, value: f64 },

    #[error("bad table shape: expected {expected} cells, got {got}")]
    BadShape { expected: usize, got: usize },

    #[error("mass not normalized: sum = {sum} (must be within 1e-9 of 1)")]
    NotNormalized { sum: f64 },

    #[error("coordinate subset must be nonempty")]
    EmptySubset,

    #[error("coordinate subset must be a proper subset of the coordinates")]
    FullSubset,

    #[error("subsets must be disjoint")]
    OverlappingSubsets,

    #[error("bad partition: {0}")]
    BadPartition(String),

    #[error("distributions live on different product spaces")]
    SpaceMismatch,

    #[error("capacity exceeded: need {needed} cells, cap is {cap}")]
    CapacityExceeded { needed: usize, cap: usize },

    #[error("cover deficient: coordinate {coordinate} covered {have} < {need} times")]
    CoverDeficient {
        coordinate: usize,
        have: usize,
        need: usize,
    },

    #[error("reference measure for coordinate {coordinate} is not absolutely continuous")]
    InfiniteDivergence { coordinate: usize },

    #[error("measure is not a product of its marginals (max deviation {max_dev})")]
    NotProduct { max_dev: f64 },

    #[error("point does not belong to the space")]
    BadPoint,

    #[error("no subset within cardinality cap {cap} satisfies the information budget")]
    BudgetInfeasible { cap: usize },

    #[error("good set carries mass {mass}, need more than {need}")]
    GoodSetTooSmall { mass: f64, need: f64 },

    #[error("sampling failed after {retries} redraws")]
    SamplingFailed { retries: u32 },

    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
