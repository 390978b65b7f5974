#![allow(dead_code)]

use num_complex::Complex64;
use otfs_jtsce::channel::{random_qam, ChannelParamSet, ChannelPath};
use otfs_jtsce::modem::{Constellation, DdGrid, OtfsParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_grid(params: &OtfsParams, rng: &mut ChaCha8Rng) -> DdGrid {
    let q = Constellation::new(4).unwrap();
    DdGrid::from_vec(params.m, params.n, random_qam(&q, params.frame_len(), rng)).unwrap()
}

/// Paths on arbitrary (possibly repeated) delays up to `l_max` with
/// fractional Doppler in `[-k_max, k_max]`.
pub fn random_paths(
    paths: usize,
    l_max: usize,
    k_max: f64,
    rng: &mut ChaCha8Rng,
) -> ChannelParamSet {
    (0..paths)
        .map(|_| {
            ChannelPath::new(
                rng.random_range(0..=l_max),
                rng.random_range(-k_max..=k_max),
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        })
        .collect()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
