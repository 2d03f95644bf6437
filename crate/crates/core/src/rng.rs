//! Counter-based random streams.
//!
//! Every stream is addressed by a key derived from a master seed and a path of
//! integer labels (`row`, `col`, trial index, ...). The `k`-th output of a
//! stream is a pure function of `(key, k)`, so values never depend on the order
//! in which streams are consumed or on how work is split across threads.

use rand::RngCore;

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_CONST1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_CONST2: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_CONST1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_CONST2);
    z ^ (z >> 31)
}

/// Address of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey(mix64(seed ^ 0x6A09_E667_F3BC_C908))
    }

    /// Key of the `index`-th child stream.
    #[inline]
    pub fn child(self, index: u64) -> Self {
        StreamKey(mix64(self.0 ^ mix64(index.wrapping_mul(GOLDEN_GAMMA).wrapping_add(MIX_CONST2))))
    }

    /// Key reached by following `path` from `self`.
    pub fn descend(self, path: &[u64]) -> Self {
        path.iter().fold(self, |k, &i| k.child(i))
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> CounterRng {
        CounterRng { key: self.0, counter: 0 }
    }
}

/// Seed for a labelled sub-computation, e.g. `derive_seed(master, &[n, big_n, trial])`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    StreamKey::new(master).descend(path).raw()
}

/// Keyed SplitMix64: output `k` is `mix64(key + k * GOLDEN_GAMMA)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
