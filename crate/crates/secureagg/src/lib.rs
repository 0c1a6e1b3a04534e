//! Inter-cluster aggregation over threshold-encrypted leader models.
//!
//! Each round the server transforms every leader model to the frequency domain
//! under encryption, reveals only its high-band energy, combines it with the
//! leader-reported distance to the previous global model into a sanitizing
//! factor, and decrypts the factor-weighted sum jointly with the leaders. Every
//! decryption lands in an [`AuditLog`].

pub mod aggregate;
pub mod audit;
pub mod decrypt;
pub mod dft;
pub mod distance;
pub mod error;
pub mod score;
pub mod spectrum;

pub use aggregate::{inter_aggregate, score_leaders, weighted_sum, AggregateOutcome};
pub use audit::{AuditLog, DecryptionEvent, ScalarKind};
pub use decrypt::{threshold_decrypt, Decryptor};
pub use dft::{bit_reverse, fhe_dft, DftPlan, DftStage, EncryptedSpectrum};
pub use distance::{fhe_md, manhattan};
pub use error::{Error, Result};
pub use score::{max_min_normalize, s_factors, SanitizingScore};
pub use spectrum::{band_energy, band_mask, high_freq_magnitude, is_high_band, mask_band};

pub type DftPlanF64 = DftPlan<f64>;
pub type SanitizingScoreF64 = SanitizingScore<f64>;
