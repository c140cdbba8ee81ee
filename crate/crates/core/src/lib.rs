#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod format;
pub mod model;
pub mod propagator;

pub use error::{Error, Result};
