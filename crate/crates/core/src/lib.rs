//! Ear-canal-scan (ECS) biometric key extraction and fuzzy-commitment
//! authentication.
//!
//! The crate is organised along the data path of a scan:
//!
//! - [`synth`] generates excitation signals, synthetic ear-canal subjects and
//!   recordings, and recovers impulse responses from them.
//! - [`features`] turns impulse responses into liftered cepstral vectors.
//! - [`keygen`] selects informative coefficients per user and binarizes them
//!   into a fixed-length key via seeded random projection.
//! - [`ecc`] provides the binary BCH codes used by the commitment.
//! - [`protocol`] implements the commitment and the earbud/verifier message
//!   exchange.
//! - [`harness`] runs dataset-level evaluations and attack suites.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
mod dsp;
pub mod ecc;
mod error;
pub mod features;
pub mod harness;
pub mod keygen;
pub mod protocol;
pub mod synth;

pub use bits::Bits;
pub use error::{Error, Result};
