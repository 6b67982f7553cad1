//! Bounds and encoders for two-dimensional constrained arrays built by bit
//! stuffing: each cell of an `M×N` array is drawn from a coin chosen by a
//! causal neighborhood of already written cells, while a fixed boundary
//! keeps the whole array valid.

pub mod bounds;
pub mod cli;
pub mod constraint;
pub mod encoder;
pub mod error;
pub mod format;
pub mod grid;
pub mod lpsolve;
pub mod tune;

pub use error::{Error, ErrorKind};
