//! Variable-exponent Lebesgue and Sobolev spaces with matrix weights on box grids.

pub mod ellipsoid;
pub mod error;
pub mod exponent;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod matweight;
pub mod muckenhoupt;
pub mod operators;
pub mod sobolev;
pub mod varnorm;

pub use error::{Error, Result};
