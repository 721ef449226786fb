//! Numerical laboratory for holomorphic semigroups on the unit disk,
//! Möbius-invariant Dirichlet-type spaces and Volterra operators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod disk;
pub mod error;
pub mod funclib;
pub mod lab;
pub mod operators;
pub mod quadrature;
pub mod semigroup;
pub mod spaces;

pub use error::{Error, Result};
pub use num_complex::Complex64;
