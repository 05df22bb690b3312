//! Random compositions of integers: exact laws, samplers and consistency checks.
//!
//! A composition structure is a sequence of random compositions `C_1, C_2, ...`
//! of `1, 2, ...` that is consistent under deleting a uniformly chosen ball.
//! The crate evaluates composition probability functions exactly (big
//! rationals) or in `f64`, builds them from decrement matrices or Lévy data,
//! reconstructs Markov structures from their structural moments, and samples
//! them by several independent constructions.

pub mod composition;
pub mod error;
pub mod laws;
pub mod quadrature;
pub mod records;
pub mod scalar;
pub mod stochastic;
pub mod structural;
pub mod verify;

pub use composition::{enumerate_compositions, enumerate_partitions, BallPosition, Composition, Partition};
pub use error::{Error, Result};
pub use scalar::{ParamValue, Rational, Scalar};
