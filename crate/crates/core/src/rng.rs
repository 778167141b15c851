//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from ChaCha8 keyed by a
//! 64-bit master seed. The 64-bit ChaCha stream id separates independent
//! purposes (environment sites, walk steps) and replicas, and the block
//! counter gives random access, so the value attached to a given site never
//! depends on which window was requested or on how work was scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream tags. A replica `r` uses `stream(r, tag)`.
pub const TAG_ENVIRONMENT: u64 = 0;
pub const TAG_WALK: u64 = 1;
pub const TAG_AUX: u64 = 2;
const TAG_BITS: u32 = 2;

/// Offset that maps signed site indices onto the unsigned word counter.
const SITE_BASE: i128 = 1 << 62;

/// Stream id for replica `replica` and purpose `tag`.
#[inline]
pub fn stream(replica: u64, tag: u64) -> u64 {
    debug_assert!(tag < (1 << TAG_BITS));
    (replica << TAG_BITS) | tag
}

/// A generator for `(seed, stream)` positioned at the start of the stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A generator positioned so that the next `u64` is the one owned by `site`.
/// Sequential draws then belong to `site + 1`, `site + 2`, ...
pub fn site_rng(seed: u64, stream: u64, site: i64) -> ChaCha8Rng {
    let mut rng = stream_rng(seed, stream);
    let word = (site as i128 + SITE_BASE) as u128 * 2;
    rng.set_word_pos(word);
    rng
}

/// Uniform in `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_access_is_window_independent() {
        let mut a = site_rng(7, stream(3, TAG_ENVIRONMENT), -5);
        let from_a: Vec<u64> = (0..10).map(|_| a.next_u64()).collect();
        let mut b = site_rng(7, stream(3, TAG_ENVIRONMENT), 0);
        assert_eq!(b.next_u64(), from_a[5]);
    }

    #[test]
    fn streams_differ() {
        let mut a = stream_rng(1, stream(0, TAG_WALK));
        let mut b = stream_rng(1, stream(1, TAG_WALK));
        assert_ne!(a.next_u64(), b.next_u64());
    }
}
