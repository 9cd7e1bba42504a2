//! Seed derivation tree.
//!
//! Every stochastic draw in the crate hangs off a single master seed. A child
//! seed is a pure function of its parent, a stream tag and an index, so the
//! draws for (run 3, rater 17) do not depend on how many draws other raters
//! consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for the derivation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Run = 1,
    Items = 2,
    Raters = 3,
    Perception = 4,
    RaterChoice = 5,
    Votes = 6,
    Pairs = 7,
    Replay = 8,
    SpamAssignment = 9,
    Subsample = 10,
    Dataset = 11,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A node in the seed derivation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedNode(pub u64);

impl SeedNode {
    pub fn new(seed: u64) -> Self {
        SeedNode(seed)
    }

    pub fn child(self, stream: Stream, index: u64) -> SeedNode {
        let tagged = splitmix64(self.0 ^ (stream as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
        SeedNode(splitmix64(tagged ^ splitmix64(index)))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}
