//! Seed derivation and the per-episode random streams.
//!
//! All randomness in an episode flows from one 64-bit episode seed, split
//! into four independent named streams: adversary, noise, learner, harness.
//! Swapping the learner therefore never perturbs the loss or noise
//! realization, which is what makes paired comparisons across learners
//! meaningful.
//!
//! The generator is ChaCha8 (`rand_chacha`), which is specified to produce
//! identical output on every platform. Stream seeds are derived from the
//! episode seed with SplitMix64 and a per-stream salt; episode seeds are
//! derived from the experiment root seed by a plain counter
//! (`episode_seed(root, i) = splitmix64(root) + i`).

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer. Used only for seed derivation, never as a stream.
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Episode seed for replication index `index` under `root_seed`.
pub fn episode_seed(root_seed: u64, index: u64) -> u64 {
    splitmix64(root_seed).wrapping_add(index)
}

/// The four named streams of one episode.
#[derive(Clone, Debug)]
pub struct Streams {
    /// Loss draws and the planted-action draw.
    pub adversary: ChaCha8Rng,
    /// Noise-parameter realization and feedback corruption.
    pub noise: ChaCha8Rng,
    /// Action sampling.
    pub learner: ChaCha8Rng,
    /// Anything episode-level that is not one of the above.
    pub harness: ChaCha8Rng,
}

const ADVERSARY_SALT: u64 = 0x61647665_72736172; // "adversar"
const NOISE_SALT: u64 = 0x6e6f6973_655f5f5f; // "noise___"
const LEARNER_SALT: u64 = 0x6c656172_6e65725f; // "learner_"
const HARNESS_SALT: u64 = 0x6861726e_6573735f; // "harness_"

impl Streams {
    /// Derive the four streams of one episode.
    pub fn for_episode(episode_seed: u64) -> Self {
        let derive = |salt: u64| ChaCha8Rng::seed_from_u64(splitmix64(episode_seed ^ salt));
        Streams {
            adversary: derive(ADVERSARY_SALT),
            noise: derive(NOISE_SALT),
            learner: derive(LEARNER_SALT),
            harness: derive(HARNESS_SALT),
        }
    }
}
