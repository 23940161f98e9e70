//! Seeded random streams and complex Gaussian sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMatrix;

/// Independent random streams consumed by one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    Gains = 1,
    Angles = 2,
    Pilots = 3,
    DownlinkNoise = 4,
    UplinkChannel = 5,
    UplinkNoise = 6,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed identifying a trial: `splitmix64(base_seed ^ splitmix64(trial_index))`.
pub fn trial_seed(base_seed: u64, trial_index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(trial_index))
}

/// Seed for one stream of a trial: `splitmix64(trial_seed + role)`.
pub fn stream_seed(trial_seed: u64, role: StreamRole) -> u64 {
    splitmix64(trial_seed.wrapping_add(role as u64))
}

pub fn stream_rng(trial_seed: u64, role: StreamRole) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(trial_seed, role))
}

/// One draw from CN(0, variance).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// Matrix of i.i.d. CN(0, variance) entries, drawn in column-major order so that a
/// matrix with more columns extends one with fewer under the same stream.
pub fn complex_normal_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, variance: f64) -> CMatrix {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| complex_normal(rng, variance)).collect();
    CMatrix::from_vec(rows, cols, data)
}
