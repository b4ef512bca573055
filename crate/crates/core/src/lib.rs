//! Numerical laboratory for the Cauchy-Leray integral, the Leray-Levi and
//! surface measures, and the Kerzman-Stein route to the Szegő projection on
//! explicit domains in C².

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundary;
pub mod cpoint;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod lab;
pub mod operators;

pub use cpoint::{CPoint2, C64};
pub use error::{LabError, Result};
pub use exec::Exec;
