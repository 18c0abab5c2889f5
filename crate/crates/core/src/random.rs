//! Seeded generators: the counter-based stream used for noise and helpers
//! producing random grid functions for identity checks.
//!
//! All randomness in the crate comes from ChaCha20 with a 64-bit seed and a
//! stream index. Path `p` of an ensemble draws from stream `p`, so results do
//! not depend on how paths are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::grid::VectorField;
use crate::vec3::{self, Vec3};

pub type StreamRng = ChaCha20Rng;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Field with independent uniform components in `[-1, 1)`.
pub fn random_field<R: Rng + ?Sized>(rng: &mut R, n: usize) -> VectorField {
    VectorField::new((0..n).map(|_| random_vec(rng)).collect())
}

/// Field of independent uniformly distributed points on the unit sphere.
pub fn random_unit_field<R: Rng + ?Sized>(rng: &mut R, n: usize) -> VectorField {
    VectorField::new((0..n).map(|_| random_unit_vec(rng)).collect())
}

fn random_vec<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]
}

pub fn random_unit_vec<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = [standard_normal(rng), standard_normal(rng), standard_normal(rng)];
        let r = vec3::norm(v);
        if r > 1e-6 {
            return vec3::scale(1.0 / r, v);
        }
    }
}
