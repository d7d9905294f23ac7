
// `!(x > 0.0)` is used on purpose throughout: unlike `x <= 0.0` it also
// rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod analytic;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod montecarlo;
mod quad;
pub mod specfun;

pub use error::{Error, Result};
