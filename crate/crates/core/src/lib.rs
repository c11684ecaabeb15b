//! Outsourced computation over BCP (Bresson–Catalano–Pointcheval) ciphertexts
//! with an access-control server that re-targets results to authorized
//! requesters.
//!
//! - [`bcp`]: the cryptosystem, with two-phase decryption and homomorphic operations.
//! - [`access`]: joint keys, dealer-registered ACS keys and re-encryption.
//! - [`engine`]: the four roles, the ciphertext store, the ADD and MULT
//!   protocols and message transport.
//! - [`codec`]: canonical JSON records for keys, ciphertexts and messages.
//! - [`bench`]: the timing harness and its CSV format.

pub mod access;
pub mod arith;
pub mod bcp;
pub mod bench;
pub mod codec;
pub mod engine;
mod error;

pub use error::{Error, Result};
