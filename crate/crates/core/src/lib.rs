//! Null alignment and null congruence analysis for Lorentzian metrics.

pub mod alignment;
pub mod bilinear;
pub mod catalog;
pub mod cli;
pub mod congruence;
pub mod error;
pub mod frames;
pub mod geometry;
pub mod jet;
pub mod metric_ir;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
