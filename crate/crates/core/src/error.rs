//! Error type shared across the crate.

use crate::rational::Rat;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid JSON: {0}")]
    Json(String),

    #[error("invalid rational `{text}`: {reason}")]
    InvalidRational { text: String, reason: String },

    #[error("field `{field}` must be nonnegative")]
    NegativeValue { field: String },

    #[error("machine count must be at least 1 (got {0})")]
    MachineCount(usize),

    #[error("precedence edge {index} references job {job}, but there are only {jobs} jobs")]
    EdgeOutOfRange { index: usize, job: usize, jobs: usize },

    #[error("precedence edge ({job}, {job}) is a self-loop")]
    SelfLoop { job: usize },

    #[error("duplicate precedence edge ({pred}, {succ})")]
    DuplicateEdge { pred: usize, succ: usize },

    #[error("precedence constraints contain a cycle through jobs {jobs:?}")]
    Cycle { jobs: Vec<usize> },

    #[error("order violates precedence constraint ({pred}, {succ})")]
    PrecedenceViolated { pred: usize, succ: usize },

    #[error("order is not a permutation of all jobs: job {job} appears {count} times")]
    NotAPermutation { job: usize, count: usize },

    #[error("single-machine solver requires machines = 1 (instance has {0})")]
    SingleMachineRequired(usize),

    #[error("instance has {jobs} jobs, above the brute-force oracle cap of {cap}")]
    OracleCapExceeded { jobs: usize, cap: usize },

    #[error("total weight of unfinished jobs is zero; no finite price exists")]
    DegeneratePrice,

    #[error("minimum cut saturates at capacity below the machine count for every price; \
             largest feasible lambda search stopped at {lambda}")]
    PriceSaturated { lambda: Rat },

    #[error("internal consistency violation: {0}")]
    Internal(String),
}
