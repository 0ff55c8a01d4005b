//! Secondary-user pairing and joint THP transceiver design for MIMO
//! cognitive radio links that must not reduce the primary user's rate.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod linalg;
pub mod pairing;
pub mod rng;
pub mod sim;
pub mod solver;
pub mod transceiver;

pub use error::{Error, Result};
