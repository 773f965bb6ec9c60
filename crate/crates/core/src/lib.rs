#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod equilibrium;
pub mod error;
pub mod learners;
pub mod market;
pub mod sim;

pub use error::{Error, Result};
