//! Tiling spaces with infinite local complexity: construction of the
//! variable-length, direct-product-variation and solenoid examples, their
//! metrics, invariant measures and complexity functions.

pub mod cli;
pub mod complexity;
pub mod dpv;
pub mod error;
pub mod geometry;
pub mod json;
pub mod matching;
pub mod measures;
pub mod metrics;
pub mod quad;
pub mod render;
pub mod solenoid;
pub mod subst1d;
pub mod transversal;

pub use error::{IlcError, Result};
