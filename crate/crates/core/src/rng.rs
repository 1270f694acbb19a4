//! Seeded random streams for chains.
//!
//! Each chain owns one [`ChainRng`] built from a `u64` seed. It holds three
//! independent ChaCha20 streams: Gaussian innovations `ξ`, gradient noise `ζ`
//! and mixture labels `η`. Separate streams keep `ξ` independent of every
//! `ζ` by construction, and make a chain's innovations identical whether or
//! not gradient noise is drawn. Normals come from `rand_distr::StandardNormal`
//! (ziggurat), which is deterministic for a given stream.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

const INNOVATION_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
const MIXING_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRng {
    innovations: ChaCha20Rng,
    noise: ChaCha20Rng,
    mixing: ChaCha20Rng,
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl ChainRng {
    pub fn new(seed: u64) -> Self {
        Self {
            innovations: stream(seed, INNOVATION_STREAM),
            noise: stream(seed, NOISE_STREAM),
            mixing: stream(seed, MIXING_STREAM),
        }
    }

    /// A fresh `N(0, I_p)` innovation.
    pub fn innovation(&mut self, p: usize) -> DVector<f64> {
        standard_normal(&mut self.innovations, p)
    }

    pub fn noise(&mut self) -> &mut ChaCha20Rng {
        &mut self.noise
    }

    pub fn mixing(&mut self) -> &mut ChaCha20Rng {
        &mut self.mixing
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R, p: usize) -> DVector<f64> {
    DVector::from_fn(p, |_, _| rng.sample(StandardNormal))
}

/// Seed of the `index`-th chain in a batch started from `base` (SplitMix64).
pub fn chain_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
