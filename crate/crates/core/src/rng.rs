//! Deterministic random streams.
//!
//! Every random decision of a run is drawn from a ChaCha stream derived from
//! the master seed and a `(purpose, generation, index)` key, so results do not
//! depend on thread scheduling or on how many individuals were drawn before.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;

pub type StreamRng = ChaCha8Rng;

/// What a derived stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Initialize = 1,
    Reproduce = 2,
    Niche = 3,
    Auxiliary = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child stream keyed by `(purpose, generation, index)`.
pub fn stream(seed: u64, purpose: Purpose, generation: u64, index: u64) -> StreamRng {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ purpose as u64);
    h = splitmix64(h ^ generation);
    h = splitmix64(h ^ index);
    ChaCha8Rng::seed_from_u64(h)
}

/// Standard normal sample (Box-Muller).
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(core::f64::consts::TAU * u2)
}
