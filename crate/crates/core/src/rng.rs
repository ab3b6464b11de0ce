//! Counter-based random streams.
//!
//! A [`Stream`] is a pure function of `(key, draw index)`: the key is derived
//! from the global seed and a path of stream ids, and the `i`-th output only
//! depends on that key and `i`. Replicas and sweep points each own a stream
//! derived from their index, so the order in which a thread pool schedules
//! them cannot change any result.
//!
//! Draw `i` is the wyhash-style 128-bit multiply-fold of a Weyl sequence
//! point `k₀ + (i + 1)·γ`, with the second key word folded into the
//! multiplier so streams whose Weyl sequences overlap still differ.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const WEYL: u64 = 0xA076_1D64_78BD_642F;
const FOLD: u64 = 0xE703_7ED1_A0B4_28DB;

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stream {
    key: [u64; 2],
    counter: u64,
}

impl Stream {
    /// Root stream for a global seed.
    pub fn new(seed: u64) -> Self {
        let k0 = mix64(seed ^ 0x6A09_E667_F3BC_C908);
        let k1 = mix64(k0.wrapping_add(GOLDEN) ^ 0xBB67_AE85_84CA_A73B);
        Self {
            key: [k0, k1],
            counter: 0,
        }
    }

    /// Root stream followed by one `derive` step.
    pub fn keyed(seed: u64, stream_id: u64) -> Self {
        Self::new(seed).derive(stream_id)
    }

    /// Child stream identified by `id`. Does not advance `self`.
    pub fn derive(&self, id: u64) -> Self {
        let k0 = mix64(self.key[0] ^ mix64(id.wrapping_mul(GOLDEN) ^ self.key[1]));
        let k1 = mix64(self.key[1].wrapping_add(k0) ^ id.rotate_left(29));
        Self {
            key: [k0, k1],
            counter: 0,
        }
    }

    /// Output at an arbitrary draw index, without touching the counter.
    #[inline]
    pub fn at(&self, index: u64) -> u64 {
        let s = self.key[0].wrapping_add(index.wrapping_add(1).wrapping_mul(WEYL));
        let m = (s as u128).wrapping_mul((s ^ self.key[1] ^ FOLD) as u128);
        (m as u64) ^ ((m >> 64) as u64)
    }

    /// Number of draws consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_raw(&mut self) -> u64 {
        let out = self.at(self.counter);
        self.counter = self.counter.wrapping_add(1);
        out
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_raw() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for Stream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_raw() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.next_raw()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_raw().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
