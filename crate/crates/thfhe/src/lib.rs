//! Threshold approximate-arithmetic homomorphic encryption.
//!
//! A CKKS-style scheme over `Z_q[X]/(X^N + 1)` with power-of-two moduli, a
//! public key for encryption, rotation keys for slot shifts, and an n-of-n
//! additive sharing of the secret. Decryption is split in three steps: the
//! server re-randomizes, floods and rescales (`server_dec`), each party
//! multiplies by its share (`part_dec`), and the server combines (`fin_dec`).
//!
//! [`MockBackend`] implements the same [`HeBackend`] interface exactly in the
//! clear for fast protocol tests and differential checks.

// Negated comparisons double as NaN rejection.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backend;
pub mod bigint;
pub mod encoding;
pub mod error;
pub mod keys;
pub mod mock;
pub mod params;
pub mod ring;
pub mod scheme;
pub mod wire;

pub use backend::{HeBackend, OpCounts, Rotation, Space};
pub use error::{Error, Result};
pub use keys::{complete_share_mod, keygen, power_of_two_rotations, KeyMaterial};
pub use mock::{MockBackend, MockCiphertext};
pub use params::ThFheParams;
pub use scheme::{Ciphertext, PartialDecryption, ThFhe};

/// Decryption tolerance at the desk preset: `2^-10`.
pub const DELTA_DEC: f64 = 1.0 / 1024.0;
/// Encoding round-trip tolerance at the desk preset: `2^-20`.
pub const DELTA_ENC: f64 = 1.0 / 1_048_576.0;
