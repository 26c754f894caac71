//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator. The 256-bit key is
//! derived from `(seed, purpose)` with SplitMix64 and the 64-bit ChaCha stream id is the
//! request id, so the draws made for one request do not depend on how many other
//! requests were processed before it, or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Purpose tags so that independent uses of the same seed never share a keystream.
pub mod purpose {
    pub const ROUNDING: u64 = 0x726f_756e_64;
    pub const GENERATOR: u64 = 0x6765_6e;
    pub const TEST: u64 = 0x7465_7374;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for request `id` under `(seed, purpose)`.
pub fn stream(seed: u64, purpose: u64, id: u64) -> Rng {
    let mut key = [0u8; 32];
    let mut s = seed ^ splitmix64(purpose);
    for chunk in key.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(id);
    rng
}
