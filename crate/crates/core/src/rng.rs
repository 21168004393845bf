//! Counter-based random streams.
//!
//! Every parallel work unit draws from its own ChaCha stream keyed by
//! `(seed, tag, index)`, so results do not depend on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

pub const TAG_SAMPLE: u64 = 1;
pub const TAG_ORBIT: u64 = 2;
pub const TAG_CONE: u64 = 3;
pub const TAG_ENTROPY: u64 = 4;
pub const TAG_CLT: u64 = 5;
pub const TAG_STABILITY: u64 = 6;
pub const TAG_DFA: u64 = 7;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, tag: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(tag)));
    rng.set_stream(index);
    rng
}

/// Split `0..n` into consecutive blocks of at most `block` items and map each
/// block in parallel. Results come back in block order.
pub fn par_blocks<T, F>(n: usize, block: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, std::ops::Range<usize>) -> T + Sync,
{
    let block = block.max(1);
    let count = n.div_ceil(block);
    (0..count)
        .into_par_iter()
        .map(|b| f(b, b * block..((b + 1) * block).min(n)))
        .collect()
}

/// Split `0..n` into exactly `parts` nearly equal blocks (fewer if n < parts).
pub fn par_parts<T, F>(n: usize, parts: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, std::ops::Range<usize>) -> T + Sync,
{
    let parts = parts.clamp(1, n.max(1));
    (0..parts)
        .into_par_iter()
        .map(|b| f(b, b * n / parts..(b + 1) * n / parts))
        .collect()
}
