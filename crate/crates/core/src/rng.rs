//! Seed derivation and complex Gaussian sampling.
//!
//! Every random stream in the crate is derived from a master seed and a list
//! of integer tags (realization index, candidate index, purpose) through a
//! SplitMix64 mixing chain. Streams are therefore independent of evaluation
//! order, which keeps parallel sweeps bit-identical to sequential ones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use num_complex::Complex64;

use crate::linalg::{CMat, CVec};

pub type SimRng = ChaCha8Rng;

/// Purpose tags used when deriving sub-streams.
pub mod tag {
    pub const CHANNEL: u64 = 0x43_48_41_4e;
    pub const PLACEMENT: u64 = 0x50_4c_41_43;
    pub const RIS_INIT: u64 = 0x52_49_53_49;
    pub const RANDOMIZATION: u64 = 0x52_41_4e_44;
    pub const SCHEME: u64 = 0x53_43_48_4d;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `tags` into `master`.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(master), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn derived(master: u64, tags: &[u64]) -> SimRng {
    seeded(derive_seed(master, tags))
}

/// One draw from CN(0, 1).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| complex_gaussian(rng))
}

pub fn complex_gaussian_mat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// `exp(i·phi)` with `phi ~ U[0, 2π)`.
pub fn unit_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(1.0, phi)
}

/// Random Hermitian matrix with CN(0,1) off-diagonal and N(0,1) diagonal.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = complex_gaussian_mat(rng, n, n);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}
