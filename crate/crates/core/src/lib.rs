//! Split conversion of MDS codes with low conversion bandwidth.

pub mod algebra;
pub mod base;
pub mod bounds;
pub mod convertible;
pub mod engine;
pub mod error;
pub mod flow;

pub use error::{Error, Result};
