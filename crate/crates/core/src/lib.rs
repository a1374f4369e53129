//! Compact 9-point finite-difference schemes for the elliptic cross-interface
//! problem `-div(a grad u) = f` with piecewise-constant `a` on four rectangles.

pub mod assembly;
pub mod error;
pub mod mesh;
pub mod plot;
pub mod problems;
pub mod rhs;
pub mod solve;
pub mod stencils;
pub mod study;
pub mod taylor;

pub use error::{Error, Result};
