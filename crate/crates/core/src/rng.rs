//! Deterministic random streams.
//!
//! A [`SeedSpec`] names a family of ChaCha8 streams; every Monte Carlo path
//! draws from its own stream `(master_seed, stream_id, path_index)`, so
//! results do not depend on how paths are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type PathRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// A sibling spec with the same master seed. Used to give independent
    /// sub-runs of one check their own streams.
    pub fn derive(&self, salt: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: splitmix(self.stream_id ^ splitmix(salt.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut state = self.master_seed ^ splitmix(self.stream_id);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            chunk.copy_from_slice(&splitmix(state).to_le_bytes());
        }
        key
    }

    /// The stream for one path.
    pub fn path_rng(&self, path_index: u64) -> PathRng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(path_index);
        rng
    }

    /// Stream for draws that are not tied to a path.
    pub fn rng(&self) -> PathRng {
        self.path_rng(u64::MAX)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform draw from the open interval (0, 1).
#[inline]
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Adds `sd · Z_i` with independent standard normals `Z_i` to each entry,
/// by the Box–Muller transform on pairs of open uniforms. Uses the
/// portable `libm` routines so draws agree across platforms.
#[inline]
pub fn add_normals<R: RngCore + ?Sized>(rng: &mut R, sd: f64, out: &mut [f64]) {
    for pair in out.chunks_mut(2) {
        let radius = sd * (-2.0 * libm::log(open_unit(rng))).sqrt();
        let (s, c) = libm::sincos(2.0 * std::f64::consts::PI * open_unit(rng));
        pair[0] += radius * c;
        if let Some(second) = pair.get_mut(1) {
            *second += radius * s;
        }
    }
}
