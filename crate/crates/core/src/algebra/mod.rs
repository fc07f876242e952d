//! Finite-field arithmetic and dense linear algebra over GF(2^8).

mod field;
mod matrix;

pub use field::{mul_shift_reduce, Field, Gf, DEFAULT_POLY};
pub use matrix::Matrix;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("polynomial {0:#05x} is not an irreducible degree-8 polynomial")]
    InvalidPolynomial(u16),
    #[error("log table disagrees with shift-and-reduce for {a:#04x} * {b:#04x} under {poly:#05x}")]
    TableMismatch { poly: u16, a: u8, b: u8 },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular system: no pivot in column {column}")]
    Singular { column: usize },
}
