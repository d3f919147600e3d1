//! Named generator families used by experiments and checks.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::product::BlaschkeProduct;

/// Random product fixing 0 with the given number of nonzero zeros, moduli
/// uniform in `modulus`, arguments uniform, and a uniform random rotation.
pub fn random_product<R: Rng + ?Sized>(
    rng: &mut R,
    origin_multiplicity: u32,
    nonzero_zeros: usize,
    modulus: (f64, f64),
) -> BlaschkeProduct {
    let zeros = (0..nonzero_zeros)
        .map(|_| Complex64::from_polar(rng.gen_range(modulus.0..modulus.1), rng.gen_range(0.0..TAU)))
        .collect();
    let rotation = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
    BlaschkeProduct::new(rotation, origin_multiplicity, zeros).expect("random zeros lie in the disc")
}

/// `count` random generators of the given degree, each with a simple zero
/// at the origin and zero moduli in `[0.05, 0.95)`.
pub fn random_generators(seed: u64, count: usize, degree: usize) -> Vec<BlaschkeProduct> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_product(&mut rng, 1, degree.saturating_sub(1), (0.05, 0.95)))
        .collect()
}

/// `bₖ(z) = z·f_{aₖ}(z)` with `1 − |aₖ| = ratioᵏ` and `arg aₖ = k·angle_step`.
/// Rotations are 1, so `bₖ'(0) = 1 − ratioᵏ > 0`.
pub fn geometric_generators(count: usize, ratio: f64, angle_step: f64) -> Result<Vec<BlaschkeProduct>> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidInput(format!("geometric ratio {ratio} must lie in (0, 1)")));
    }
    (1..=count)
        .map(|k| {
            let gap = ratio.powi(k as i32);
            BlaschkeProduct::from_zeros(1, vec![Complex64::from_polar(1.0 - gap, k as f64 * angle_step)])
        })
        .collect()
}

/// All zeros of the same modulus, arguments advancing by `angle_step`.
pub fn constant_generators(count: usize, radius: f64, angle_step: f64) -> Result<Vec<BlaschkeProduct>> {
    (1..=count)
        .map(|k| BlaschkeProduct::from_zeros(1, vec![Complex64::from_polar(radius, k as f64 * angle_step)]))
        .collect()
}
