//! Dispersive semigroup kernels on H-type groups: group algebra, special
//! functions, phase symbols, the Littlewood-Paley frame, kernel evaluation
//! and decay analysis.

pub mod analysis;
pub mod error;
pub mod frame;
pub mod group;
pub mod kernel;
pub mod quad;
pub mod special;
pub mod symbols;

pub use error::{Error, Result};
