use thiserror::Error;

use crate::algebra::AlgebraError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(
        "not in the split regime: kI = {k_i} is not lambda * kF with lambda >= 2 for kF = {k_f}"
    )]
    NotSplitRegime { k_i: usize, k_f: usize },

    #[error("rF = {r_f} >= kF = {k_f}: no bandwidth savings are possible, use default conversion")]
    NoSavings { r_f: usize, k_f: usize },

    #[error("{what} index {index} out of range 1..={max}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        max: usize,
    },

    #[error("invalid evaluation points: {0}")]
    InvalidPoints(String),

    #[error("no MDS evaluation points for [{n}, {k}] over GF(256) with poly {poly:#05x}")]
    SearchFailed { n: usize, k: usize, poly: u16 },

    #[error("construction invariant violated: {0}")]
    Construction(String),

    #[error("bound not defined here: {0}")]
    BoundRegion(String),

    #[error(
        "plan violation: read of symbol {symbol} instance {instance} is not in the download plan"
    )]
    PlanViolation { symbol: usize, instance: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("decode needs exactly {expected} distinct symbols, got {found}")]
    WrongSymbolCount { expected: usize, found: usize },

    #[error("codeword format: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
