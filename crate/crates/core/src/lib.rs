//! Distributed state estimation over sensor networks with localized anomaly
//! detection and Q-redundant observer design.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detect;
pub mod error;
pub mod gain;
pub mod harness;
pub mod linalg;
pub mod network;
pub mod sim;
pub mod structure;

pub use error::{Error, Result};
