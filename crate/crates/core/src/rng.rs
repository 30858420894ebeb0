//! Keyed counter-based random streams.
//!
//! A [`RandomStream`] is a ChaCha8 keystream whose 256-bit key is derived
//! from a master seed and a path of integer labels. Substreams are obtained
//! by extending the path, so the bits consumed by replicate 7, dimension 2
//! do not depend on how many other replicates were drawn or in what order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn absorb(key: [u64; 4], label: u64) -> [u64; 4] {
    let mut out = [0u64; 4];
    let mut acc = splitmix(label ^ 0x5851_f42d_4c95_7f2d);
    for (i, (o, k)) in out.iter_mut().zip(key).enumerate() {
        acc = splitmix(acc ^ k ^ (i as u64).wrapping_mul(GOLDEN));
        *o = acc;
    }
    out
}

/// A reproducible stream of random bits identified by `(seed, path)`.
#[derive(Clone, Debug)]
pub struct RandomStream {
    key: [u64; 4],
    core: ChaCha8Rng,
    buffer: u64,
    buffered: u32,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::from_key(absorb([0; 4], seed))
    }

    fn from_key(key: [u64; 4]) -> Self {
        let mut bytes = [0u8; 32];
        for (chunk, k) in bytes.chunks_exact_mut(8).zip(key) {
            chunk.copy_from_slice(&k.to_le_bytes());
        }
        Self {
            key,
            core: ChaCha8Rng::from_seed(bytes),
            buffer: 0,
            buffered: 0,
        }
    }

    /// Independent child stream labelled by `path`. The parent's position in
    /// its own stream is irrelevant.
    pub fn substream(&self, path: &[u64]) -> Self {
        let key = path.iter().fold(self.key, |k, &label| absorb(k, label));
        Self::from_key(key)
    }

    pub fn next_bit(&mut self) -> bool {
        if self.buffered == 0 {
            self.buffer = self.core.next_u64();
            self.buffered = 64;
        }
        let bit = self.buffer & 1 == 1;
        self.buffer >>= 1;
        self.buffered -= 1;
        bit
    }

    /// Uniform draw on `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.core.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.core.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.core.fill_bytes(dst)
    }
}
