// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abm;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod exposure;
pub mod pde;
pub mod scenario;

pub use error::{Error, Result};
