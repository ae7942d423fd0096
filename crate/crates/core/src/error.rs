use alloc::string::String;

/// Errors produced by the width, degrees-of-freedom and truncation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid norm weights: {0}")]
    InvalidWeights(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("unit ball is not polyhedral")]
    NotPolyhedral,
    #[error("extreme point enumeration cap exceeded: dim {dim} > cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("convex solve did not converge (best bound so far {bound})")]
    SolverFailure { bound: f64 },
    #[error("wrong norm case: {0}")]
    WrongCase(&'static str),
    #[error("size cap exceeded: {0}")]
    SizeCap(&'static str),
    #[error("indeterminate count: bracket of d_{index} straddles the level (count {low}..={high})")]
    Indeterminate { index: usize, low: usize, high: usize },
    #[error("invalid bracket: N(hi) = {high_count}, N(lo) = {low_count}, target n = {target}")]
    InvalidBracket { low_count: usize, high_count: usize, target: usize },
    #[error("ladder needs at least two certified rungs")]
    InsufficientRungs,
    #[error("rung values decrease between m = {first} and m = {second}")]
    MonotonicityViolation { first: usize, second: usize },
    #[error("greedy witness did not terminate within {0} iterations")]
    NonTermination(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
