//! Adaptive Bayesian optimization of Pareto frontiers for black-box problems
//! whose constraints are only observed as a binary feasible/infeasible label.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acquisition;
pub mod cli;
pub mod ehvi;
pub mod error;
pub mod evaluation;
pub mod optimizer;
pub mod pareto;
pub mod problems;
pub mod surrogate;
pub mod types;

pub use error::{Error, Result};
pub use types::{Bounds, Dataset, Feasibility, Sample};
