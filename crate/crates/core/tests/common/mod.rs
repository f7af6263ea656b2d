#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zdlab::MemoryOne;

/// Fully mixed opponents with every probability in [0.05, 0.95].
pub fn random_opponents(count: usize, seed: u64) -> Vec<MemoryOne> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let probs = std::array::from_fn(|_| rng.gen_range(0.05..=0.95));
            let init = rng.gen_range(0.05..=0.95);
            MemoryOne::new(format!("opp{i}"), probs, init).unwrap()
        })
        .collect()
}
