#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod funcjet;
pub mod geometry;
pub mod grid;
pub mod quad;
pub mod regimes;
pub mod report;
pub mod verifier;
pub mod weights;
pub mod applications;

pub use error::{Error, Result};
