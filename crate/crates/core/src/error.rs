use thiserror::Error;

use crate::norms::SupNormEnclosure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent must be a positive integer, got {0}")]
    NonPositiveExponent(i64),

    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,

    #[error("empty product (n = 0) is degenerate for bound checks")]
    DegenerateProduct,

    #[error("grid size must be at least 1, got {0}")]
    InvalidGrid(usize),

    #[error("not realizable by an integer multiset: {0}")]
    NotRealizable(String),

    #[error("trailing coefficient {0} is too large to factor")]
    TooLargeToFactor(String),

    #[error("multiset sizes differ: {0} vs {1}")]
    SizeMismatch(u64, u64),

    #[error("coefficient {coeff} at index {index} is not in {{-1, 0, 1}}")]
    NotPlusMinusOne { index: usize, coeff: String },

    #[error("coefficient {0} does not fit a multiset multiplicity")]
    MultiplicityOverflow(String),

    #[error("refinement stopped after {iterations} rounds at width {width:e}")]
    RefineCapExhausted {
        iterations: usize,
        width: f64,
        best: Box<SupNormEnclosure>,
    },

    #[error("search space of {candidates} candidates exceeds cap {cap}")]
    SpaceTooLarge { candidates: u128, cap: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
