//! Boundary geometry, invariant-metric bounds, regularity checks and
//! boundary extension of holomorphic maps for domains in C^n.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domains;
pub mod error;
pub mod expr;
pub mod extension;
pub mod metrics;
pub mod optim;
pub mod point;
pub mod psh;
pub mod quad;
pub mod regularity;
pub mod scenarios;

pub use error::{Error, Result};
pub use point::{c, CMatrix, CPoint, C64};
