//! Numerical constructions around Abel universal functions on the unit disc.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod builder;
pub mod compacta;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod invariant;
pub mod poly;
pub mod probe;
pub mod report;

pub use error::{Error, Result};
pub use num_complex::Complex64;
