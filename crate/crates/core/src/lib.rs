// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiment;
pub mod pipeline;
pub mod session;
pub mod sim;
pub mod stats;
