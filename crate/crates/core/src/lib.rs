//! Latency and reliability models for vehicular URLLC links.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fbl;
pub mod matching;
pub mod numerics;
pub mod outage;
pub mod queueing;
pub mod rng;
pub mod traffic;
pub mod v2i;
pub mod v2v;

pub use error::{Error, Result};
