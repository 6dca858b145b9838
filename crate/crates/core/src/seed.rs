//! Seed expansion.
//!
//! Every random draw in the toolkit descends from one root seed. A stage asks
//! for its own generator by name and counter; the ChaCha stream id carries the
//! stage so independent stages never share a keystream, and reruns of a single
//! stage reproduce exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named stages that consume randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Synth = 1,
    NullModel = 2,
    Baseline = 3,
}

pub fn stage_rng(root: u64, stage: Stage, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(root ^ splitmix(counter)));
    rng.set_stream(stage as u64);
    rng
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stage_rng(7, Stage::NullModel, 3).random();
        let b: u64 = stage_rng(7, Stage::NullModel, 3).random();
        let c: u64 = stage_rng(7, Stage::NullModel, 4).random();
        let d: u64 = stage_rng(7, Stage::Baseline, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
