//! Three-step Newton-Traub iteration with generalized Lipschitz
//! (κ-average) local convergence theory.

// `!(x > 0.0)` is the idiom for rejecting NaN together with non-positive input.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averages;
pub mod bounds;
pub mod error;
pub mod problems;
pub mod radii;
pub mod reproduce;
pub mod solver;

pub use averages::{AverageFunction, LipschitzModel};
pub use error::{Error, FactorStage, Result};
