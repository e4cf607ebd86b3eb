//! Seeded random streams.
//!
//! A stream is identified by `(seed, domain, unit)`. Domains separate the
//! purposes a seed is used for (bootstrap draws, feature sampling, ...) and
//! units index the independent pieces of work inside one purpose.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for work unit `unit` of `domain` under `seed`.
pub fn stream(seed: u64, domain: u64, unit: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain)));
    rng.set_stream(unit);
    rng
}

/// Stable domain tags.
pub mod domain {
    pub const COHORT: u64 = 0x636f_686f_7274;
    pub const SPLIT: u64 = 0x73706c6974;
    pub const FOLDS: u64 = 0x666f6c6473;
    pub const SMOTE: u64 = 0x736d6f7465;
    pub const TREE: u64 = 0x74726565;
    pub const BOOTSTRAP: u64 = 0x626f6f74;
    pub const BOOST_ROWS: u64 = 0x62726f7773;
    pub const BOOST_TREE: u64 = 0x6274726565;
    pub const SVM: u64 = 0x73766d;
    pub const INIT: u64 = 0x696e6974;
    pub const BATCHES: u64 = 0x6261746368;
    pub const PERMUTE: u64 = 0x7065726d;
    pub const SEARCH: u64 = 0x736561726368;
    pub const PLANTED: u64 = 0x706c616e74;
}

/// Fisher-Yates shuffle of `0..n`.
pub fn permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    shuffle(rng, &mut idx);
    idx
}

pub fn shuffle<T, R: Rng + ?Sized>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// `count` distinct indices from `0..n`, in draw order.
pub fn sample_without_replacement<R: Rng + ?Sized>(rng: &mut R, n: usize, count: usize) -> Vec<usize> {
    let count = count.min(n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, domain::TREE, 3).random();
        let b: u64 = stream(7, domain::TREE, 3).random();
        let c: u64 = stream(7, domain::TREE, 4).random();
        let d: u64 = stream(7, domain::SMOTE, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn sampling_without_replacement_is_distinct() {
        let mut rng = stream(1, 2, 3);
        let mut s = sample_without_replacement(&mut rng, 50, 20);
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 20);
        assert!(s.iter().all(|&i| i < 50));
    }
}
