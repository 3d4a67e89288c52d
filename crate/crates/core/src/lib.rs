//! Loewner chains driven by correlated complex Brownian motion.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod ks;
pub mod model;
pub mod phases;
pub mod point_tracker;
pub mod quadrature;
pub mod stationary;
pub mod slit_engine;
pub mod streams;

pub use error::{Error, Result};
