//! Seed-to-stream mapping shared by every generator.
//!
//! Subject `id` of a run with seed `s` draws from ChaCha8 seeded with
//! `seed_from_u64(s)` and switched to stream `id`. Uniforms are
//! `((x >> 11) + 1) * 2^-53` for successive `next_u64` outputs `x`, which lie
//! in `(0, 1]`, and exponential variates are `-ln(u) / rate`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SubjectRng(ChaCha8Rng);

impl SubjectRng {
    pub fn new(seed: u64, subject: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(subject);
        Self(rng)
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential with the given rate; `rate` must be positive.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -libm::log(self.uniform()) / rate
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        // u in (0, 1], so p = 0 never fires and p = 1 always does
        self.uniform() <= p
    }
}

/// Seed of replication `rep` derived from a master seed (SplitMix64 finaliser).
pub fn replication_seed(master: u64, rep: u64) -> u64 {
    let mut z = master.wrapping_add(rep.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
