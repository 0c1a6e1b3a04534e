//! Labelled deterministic random streams.
//!
//! Every random draw in the system comes from a stream obtained here. A stream is
//! a ChaCha20 generator keyed by `SHA-256(domain ‖ master_seed_le ‖ label)`, so it
//! depends only on its inputs and not on platform, draw order elsewhere, or thread
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha20Rng;

const DOMAIN: &[u8] = b"ofl/stream/v1";

pub fn seed_rng(master_seed: u64, stream_label: &str) -> Stream {
    Stream::from_seed(stream_key(master_seed, stream_label))
}

/// 64-bit seed derived the same way, for handing to sub-experiments.
pub fn derive_seed(master_seed: u64, label: &str) -> u64 {
    let key = stream_key(master_seed, label);
    u64::from_le_bytes(key[..8].try_into().expect("8 bytes"))
}

fn stream_key(master_seed: u64, label: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update(master_seed.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.finalize().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(seed: u64, label: &str) -> Vec<u64> {
        let mut r = seed_rng(seed, label);
        (0..100).map(|_| r.random()).collect()
    }

    #[test]
    fn identical_inputs_identical_streams() {
        assert_eq!(draws(42, "client-0"), draws(42, "client-0"));
    }

    #[test]
    fn labels_and_seeds_separate_streams() {
        assert_ne!(draws(42, "client-0")[0], draws(42, "client-1")[0]);
        assert_ne!(draws(42, "client-0"), draws(43, "client-0"));
    }

    const PINNED_FIRST_DRAW: u64 = 4_897_819_702_698_337_688;
    // First 8 bytes of SHA-256("ofl/stream/v1" || 7u64 LE || 1u64 LE || "x"), computed externally.
    const PINNED_SEED: u64 = 17_700_397_056_656_334_590;

    #[test]
    fn stream_is_pinned() {
        // Guards the cross-platform contract: a change here breaks old manifests.
        let first: u64 = seed_rng(42, "client-0").random();
        assert_eq!(first, PINNED_FIRST_DRAW);
        assert_eq!(derive_seed(7, "x"), PINNED_SEED);
        assert_ne!(derive_seed(7, "x"), derive_seed(7, "y"));
    }
}
