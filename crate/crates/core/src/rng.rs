//! Seeded random streams.
//!
//! One scenario seed fans out into independent named streams so that the
//! scenario (initial placement, task walks, attrition) is identical no matter
//! which controller runs on it. Attrition draws are counter-based, keyed by
//! (drone id, tick), so a drone's fate never depends on how many draws other
//! parts of the simulation consumed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INIT_STREAM: u64 = 0x696e_6974;
const DYNAMICS_STREAM: u64 = 0x7761_6c6b;
const ATTRITION_STREAM: u64 = 0x6174_7472;
const CONTROLLER_STREAM: u64 = 0x6374_726c;

pub type StreamRng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn key(seed: u64, stream: u64) -> [u8; 32] {
    let mut out = [0u8; 32];
    let mut state = splitmix(seed) ^ stream.rotate_left(17);
    for chunk in out.chunks_mut(8) {
        state = splitmix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    out
}

/// Named streams derived from one scenario seed.
#[derive(Debug, Clone)]
pub struct RngStreams {
    seed: u64,
    attrition_key: [u8; 32],
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        RngStreams { seed, attrition_key: key(seed, ATTRITION_STREAM) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Initial placement of drones and tasks.
    pub fn scenario_init(&self) -> StreamRng {
        ChaCha8Rng::from_seed(key(self.seed, INIT_STREAM))
    }

    /// Task random walk.
    pub fn scenario_dynamics(&self) -> StreamRng {
        ChaCha8Rng::from_seed(key(self.seed, DYNAMICS_STREAM))
    }

    /// Randomness private to a controller.
    pub fn controller(&self) -> StreamRng {
        ChaCha8Rng::from_seed(key(self.seed, CONTROLLER_STREAM))
    }

    /// Uniform draw in [0, 1) for drone `drone` at tick `tick`.
    pub fn attrition_uniform(&self, drone: usize, tick: u64) -> f64 {
        let mut rng = ChaCha8Rng::from_seed(self.attrition_key);
        rng.set_stream(drone as u64);
        rng.set_word_pos(u128::from(tick) * 2);
        let bits = rng.next_u64();
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Convenience for tests that just need a reproducible generator.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
