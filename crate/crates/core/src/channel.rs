//! Sampled doubly-selective channel, noise and timing-offset impairments.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::modem::{Constellation, DtGrid, OtfsParams, TimeSeries};

/// One propagation path: integer delay tap, real Doppler tap and complex gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPath {
    pub delay: usize,
    pub doppler: f64,
    pub gain: Complex64,
}

impl ChannelPath {
    pub fn new(delay: usize, doppler: f64, gain: Complex64) -> Self {
        Self {
            delay,
            doppler,
            gain,
        }
    }
}

/// A set of paths, kept sorted by delay.
///
/// Estimators may report several paths on the same delay tap (the impulse
/// pilot baseline does), so distinct delays are checked separately by
/// [`ChannelParamSet::has_distinct_delays`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelParamSet {
    paths: Vec<ChannelPath>,
}

impl ChannelParamSet {
    pub fn new(mut paths: Vec<ChannelPath>) -> Self {
        paths.sort_by_key(|p| p.delay);
        Self { paths }
    }

    pub fn single(delay: usize, doppler: f64, gain: Complex64) -> Self {
        Self::new(vec![ChannelPath::new(delay, doppler, gain)])
    }

    pub fn identity() -> Self {
        Self::single(0, 0.0, Complex64::new(1.0, 0.0))
    }

    pub fn paths(&self) -> &[ChannelPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ChannelPath> {
        self.paths.iter()
    }

    pub fn delays(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p.delay).collect()
    }

    pub fn max_delay(&self) -> Option<usize> {
        self.paths.last().map(|p| p.delay)
    }

    pub fn has_distinct_delays(&self) -> bool {
        self.paths.windows(2).all(|w| w[0].delay < w[1].delay)
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    /// Scales gains so that the total path power is one.
    pub fn normalize(&mut self) {
        let p = self.total_power().sqrt();
        if p > 0.0 {
            self.paths.iter_mut().for_each(|path| path.gain /= p);
        }
    }

    /// Union of two path sets.
    pub fn merged(&self, other: &ChannelParamSet) -> ChannelParamSet {
        let mut paths = self.paths.clone();
        paths.extend_from_slice(&other.paths);
        Self::new(paths)
    }
}

impl FromIterator<ChannelPath> for ChannelParamSet {
    fn from_iter<I: IntoIterator<Item = ChannelPath>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ChannelParamSet {
    type Item = &'a ChannelPath;
    type IntoIter = std::slice::Iter<'a, ChannelPath>;

    fn into_iter(self) -> Self::IntoIter {
        self.paths.iter()
    }
}

/// Received samples together with the ground truth that produced them.
#[derive(Debug, Clone)]
pub struct ImpairedSignal {
    pub samples: TimeSeries,
    /// Number of samples inserted ahead of the prefixed frame.
    pub true_theta: usize,
    pub noise_var: f64,
}

impl ImpairedSignal {
    /// `theta mod M`.
    pub fn theta_d(&self, m: usize) -> usize {
        self.true_theta % m
    }

    /// `floor(theta / M)`.
    pub fn theta_t(&self, m: usize) -> usize {
        self.true_theta / m
    }
}

/// Evaluates `r[n'] = sum_i h_i s[n' - l_i] e^{j 2 pi k_i (n' - l_i) / MN}`.
///
/// `n'` is the absolute time index carried by `s.start`; samples before the
/// buffer are zero.
pub fn apply_channel(
    s: &TimeSeries,
    h: &ChannelParamSet,
    params: &OtfsParams,
) -> Result<TimeSeries> {
    let len = s.len();
    if let Some(p) = h.iter().find(|p| p.delay >= len.max(1)) {
        return Err(Error::InvalidParams(format!(
            "delay tap {} exceeds signal length {}",
            p.delay, len
        )));
    }
    let mn = params.frame_len() as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for path in h {
        let l = path.delay;
        let w = 2.0 * PI * path.doppler / mn;
        for (i, r) in out.iter_mut().enumerate().skip(l) {
            let t = (s.start + (i - l) as i64) as f64;
            *r += path.gain * s.samples[i - l] * Complex64::from_polar(1.0, w * t);
        }
    }
    Ok(TimeSeries::with_start(out, s.start))
}

/// Delay-time domain input/output relation for one frame.
///
/// `Y[l, n] = sum_i h_i X[l - l_i, n] e^{j 2 pi k_i (nM + l - l_i) / MN}`, where
/// rows `l < l_i` read the previous column through the cyclic prefix.
pub fn dt_io_oracle(x: &DtGrid, h: &ChannelParamSet) -> DtGrid {
    let (m, n) = (x.m(), x.n());
    let mn = (m * n) as f64;
    let mut y = DtGrid::zeros(m, n);
    for path in h {
        let li = path.delay as i64;
        for l in 0..m as i64 {
            for col in 0..n as i64 {
                let (src_l, src_n) = if l >= li {
                    (l - li, col)
                } else {
                    (l - li + m as i64, (col - 1).rem_euclid(n as i64))
                };
                let t = (col * m as i64 + l - li) as f64;
                let ph = Complex64::from_polar(1.0, 2.0 * PI * path.doppler * t / mn);
                y[(l as usize, col as usize)] +=
                    path.gain * x[(src_l as usize, src_n as usize)] * ph;
            }
        }
    }
    y
}

/// Draws `CN(0, 1)` samples.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * s, im * s)
        })
        .collect()
}

/// Adds circularly-symmetric white Gaussian noise of variance `noise_var`.
pub fn add_awgn<R: Rng + ?Sized>(s: &TimeSeries, noise_var: f64, rng: &mut R) -> TimeSeries {
    assert!(noise_var >= 0.0, "noise variance must be non-negative");
    let mut out = s.clone();
    if noise_var > 0.0 {
        let sd = noise_var.sqrt();
        for (z, w) in out.samples.iter_mut().zip(complex_normal(rng, s.len())) {
            *z += w * sd;
        }
    }
    out
}

/// Uniformly random unit-power QAM samples.
pub fn random_qam<R: Rng + ?Sized>(c: &Constellation, len: usize, rng: &mut R) -> Vec<Complex64> {
    let bits: Vec<u8> = (0..len * c.bits_per_symbol())
        .map(|_| rng.random_range(0..2u8))
        .collect();
    c.map(&bits).expect("whole symbols")
}

/// Surrounds a prefixed frame with `theta` leading and `M N` trailing random
/// QAM samples, so the frame prefix begins at buffer index `theta`.
pub fn insert_timing_offset<R: Rng + ?Sized>(
    s: &TimeSeries,
    theta: usize,
    params: &OtfsParams,
    rng: &mut R,
) -> Result<TimeSeries> {
    let c = Constellation::new(params.qam_order)?;
    let mut samples = random_qam(&c, theta, rng);
    samples.extend_from_slice(&s.samples);
    samples.extend(random_qam(&c, params.frame_len(), rng));
    Ok(TimeSeries::with_start(samples, s.start - theta as i64))
}

/// Timing offset, channel and noise applied to one prefixed frame.
pub fn impair<R: Rng + ?Sized>(
    frame: &TimeSeries,
    h: &ChannelParamSet,
    theta: usize,
    noise_var: f64,
    params: &OtfsParams,
    rng: &mut R,
) -> Result<ImpairedSignal> {
    let padded = insert_timing_offset(frame, theta, params, rng)?;
    let faded = apply_channel(&padded, h, params)?;
    Ok(ImpairedSignal {
        samples: add_awgn(&faded, noise_var, rng),
        true_theta: theta,
        noise_var,
    })
}

/// Random channel: first path at delay 0, the others on distinct delays
/// drawn from `1..=l_max`; Jakes Doppler `k_max cos(phi)`; Rayleigh gains
/// with unit total power.
pub fn gen_random_channel<R: Rng + ?Sized>(
    paths: usize,
    l_max: usize,
    k_max: f64,
    fractional: bool,
    rng: &mut R,
) -> Result<ChannelParamSet> {
    if paths == 0 || paths > l_max + 1 {
        return Err(Error::InvalidParams(format!(
            "cannot place {paths} paths on delays 0..={l_max}"
        )));
    }
    let mut delays = vec![0];
    delays.extend(
        rand::seq::index::sample(rng, l_max, paths - 1)
            .into_iter()
            .map(|d| d + 1),
    );
    delays.sort_unstable();
    let gains = complex_normal(rng, paths);
    let mut set: ChannelParamSet = delays
        .into_iter()
        .zip(gains)
        .map(|(delay, gain)| {
            let phi = rng.random_range(0.0..2.0 * PI);
            let k = k_max * phi.cos();
            ChannelPath::new(delay, if fractional { k } else { k.round() }, gain)
        })
        .collect();
    set.normalize();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{add_rcp, deserialize, remove_rcp, serialize, Grid};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_series(rng: &mut ChaCha8Rng, len: usize) -> TimeSeries {
        TimeSeries::new(complex_normal(rng, len))
    }

    #[test]
    fn identity_channel_is_identity() {
        let p = OtfsParams::new(4, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_series(&mut rng, 16);
        assert_eq!(
            apply_channel(&s, &ChannelParamSet::identity(), &p).unwrap(),
            s
        );
    }

    #[test]
    fn pure_delay_shifts_impulse() {
        let p = OtfsParams::new(4, 4, 2).unwrap();
        let mut s = TimeSeries::new(vec![c(0.0, 0.0); 16]);
        s.samples[0] = c(1.0, 0.0);
        let h = ChannelParamSet::single(2, 0.0, c(1.0, 0.0));
        let r = apply_channel(&s, &h, &p).unwrap();
        for (i, z) in r.samples.iter().enumerate() {
            assert_eq!(*z, c(if i == 2 { 1.0 } else { 0.0 }, 0.0));
        }
    }

    #[test]
    fn doppler_matches_scalar_loop() {
        let p = OtfsParams::new(4, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_series(&mut rng, 16);
        let h = ChannelParamSet::single(0, 1.0, c(1.0, 0.0));
        let r = apply_channel(&s, &h, &p).unwrap();
        for n in 0..16 {
            let (sin, cos) = (2.0 * PI * n as f64 / 16.0).sin_cos();
            let want = s.samples[n] * c(cos, sin);
            assert!((r.samples[n] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_delay_beyond_signal() {
        let p = OtfsParams::new(4, 4, 2).unwrap();
        let s = TimeSeries::new(vec![c(1.0, 0.0); 3]);
        assert!(apply_channel(&s, &ChannelParamSet::single(3, 0.0, c(1.0, 0.0)), &p).is_err());
    }

    #[test]
    fn dt_oracle_matches_time_domain_chain() {
        let params = OtfsParams::new(32, 16, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let h = gen_random_channel(5, 7, 4.0, true, &mut rng).unwrap();
            let x = DtGrid(Grid::from_vec(32, 16, complex_normal(&mut rng, 512)).unwrap());
            let tx = add_rcp(&serialize(&x), 8).unwrap();
            let rx = remove_rcp(&apply_channel(&tx, &h, &params).unwrap(), 8).unwrap();
            let y = deserialize(&rx, &params).unwrap();
            assert!(y.max_abs_diff(&dt_io_oracle(&x, &h)) <= 1e-10);
        }
    }

    #[test]
    fn single_delay_oracle_is_row_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = DtGrid(Grid::from_vec(6, 4, complex_normal(&mut rng, 24)).unwrap());
        let y = dt_io_oracle(&x, &ChannelParamSet::single(1, 0.0, c(1.0, 0.0)));
        for l in 1..6 {
            assert_eq!(y.row(l), x.row(l - 1));
        }
        assert_eq!(dt_io_oracle(&x, &ChannelParamSet::identity()), x);
    }

    #[test]
    fn delay_gain_energy() {
        let p = OtfsParams::new(8, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut v = complex_normal(&mut rng, 32);
        v.extend([c(0.0, 0.0); 3]);
        let s = TimeSeries::new(v);
        let h = ChannelParamSet::single(3, 0.0, c(0.6, -0.3));
        let r = apply_channel(&s, &h, &p).unwrap();
        assert!((r.energy() - 0.45 * s.energy()).abs() < 1e-12 * s.energy());
    }

    #[test]
    fn noise_variance_and_circularity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = TimeSeries::new(vec![c(0.3, -0.1); 1_000_000]);
        let r = add_awgn(&s, 0.25, &mut rng);
        let d: Vec<Complex64> = r
            .samples
            .iter()
            .zip(&s.samples)
            .map(|(a, b)| a - b)
            .collect();
        let n = d.len() as f64;
        let var = d.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        let var_re = d.iter().map(|z| z.re * z.re).sum::<f64>() / n;
        let var_im = d.iter().map(|z| z.im * z.im).sum::<f64>() / n;
        assert!((var / 0.25 - 1.0).abs() < 0.01, "{var}");
        assert!((var_re / 0.125 - 1.0).abs() < 0.01);
        assert!((var_im / 0.125 - 1.0).abs() < 0.01);
        assert_eq!(add_awgn(&s, 0.0, &mut rng), s);
    }

    #[test]
    fn timing_offset_layout() {
        let p = OtfsParams::new(128, 4, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let frame = add_rcp(&TimeSeries::new(vec![c(0.0, 0.0); 512]), 8).unwrap();
        let padded = insert_timing_offset(&frame, 37, &p, &mut rng).unwrap();
        assert_eq!(padded.len(), 37 + 520 + 512);
        assert_eq!(padded.index_of(0), Some(37 + 8));
        assert!(padded.samples[..37]
            .iter()
            .all(|z| (z.norm() - 1.0).abs() < 1e-12));
        let sig = ImpairedSignal {
            samples: padded,
            true_theta: 37,
            noise_var: 0.0,
        };
        assert_eq!((sig.theta_d(128), sig.theta_t(128)), (37, 0));
        let sig = ImpairedSignal {
            true_theta: 3 * 128 + 5,
            ..sig
        };
        assert_eq!((sig.theta_d(128), sig.theta_t(128)), (5, 3));
        let zero = insert_timing_offset(&frame, 0, &p, &mut rng).unwrap();
        assert_eq!(&zero.samples[..520], &frame.samples[..]);
    }

    #[test]
    fn random_channel_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let one = gen_random_channel(1, 10, 4.0, true, &mut rng).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.paths()[0].delay, 0);
        assert!((one.paths()[0].gain.norm() - 1.0).abs() < 1e-12);
        for _ in 0..200 {
            let h = gen_random_channel(6, 10, 4.0, false, &mut rng).unwrap();
            assert_eq!(h.paths()[0].delay, 0);
            assert!(h.has_distinct_delays());
            assert!(h.max_delay().unwrap() <= 10);
            assert!((h.total_power() - 1.0).abs() < 1e-12);
            assert!(h
                .iter()
                .all(|p| p.doppler.abs() <= 4.0 && p.doppler.fract() == 0.0));
        }
        assert!(gen_random_channel(12, 10, 4.0, true, &mut rng).is_err());
    }

    #[test]
    fn doppler_follows_arcsine_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k_max = 4.0;
        let mut hist = [0usize; 16];
        let mut draws = 0;
        while draws < 100_000 {
            for p in gen_random_channel(1, 0, k_max, true, &mut rng)
                .unwrap()
                .iter()
            {
                let b = (((p.doppler + k_max) / (2.0 * k_max)) * 16.0).floor() as usize;
                hist[b.min(15)] += 1;
                draws += 1;
            }
        }
        let cdf = |x: f64| 0.5 + (x / k_max).clamp(-1.0, 1.0).asin() / PI;
        for (b, &count) in hist.iter().enumerate() {
            let lo = -k_max + 2.0 * k_max * b as f64 / 16.0;
            let hi = lo + 2.0 * k_max / 16.0;
            let want = cdf(hi) - cdf(lo);
            let got = count as f64 / draws as f64;
            let sd = (want * (1.0 - want) / draws as f64).sqrt();
            assert!((got - want).abs() < 5.0 * sd, "bin {b}: {got} vs {want}");
        }
    }

    proptest! {
        #[test]
        fn linear_in_signal(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
            let p = OtfsParams::new(8, 4, 4).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = gen_random_channel(3, 3, 2.0, true, &mut rng).unwrap();
            let s1 = TimeSeries::with_start(complex_normal(&mut rng, 36), -4);
            let s2 = TimeSeries::with_start(complex_normal(&mut rng, 36), -4);
            let (ca, cb) = (c(a, 0.5), c(b, -0.25));
            let mix = TimeSeries::with_start(
                s1.samples.iter().zip(&s2.samples).map(|(x, y)| ca * x + cb * y).collect(),
                -4,
            );
            let r = apply_channel(&mix, &h, &p).unwrap();
            let r1 = apply_channel(&s1, &h, &p).unwrap();
            let r2 = apply_channel(&s2, &h, &p).unwrap();
            for i in 0..36 {
                let want = ca * r1.samples[i] + cb * r2.samples[i];
                prop_assert!((r.samples[i] - want).norm() <= 1e-12);
            }
        }

        #[test]
        fn superposition_over_paths(seed in any::<u64>()) {
            let p = OtfsParams::new(8, 4, 4).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h1 = gen_random_channel(2, 3, 2.0, true, &mut rng).unwrap();
            let h2 = gen_random_channel(3, 3, 2.0, true, &mut rng).unwrap();
            let s = TimeSeries::with_start(complex_normal(&mut rng, 36), -4);
            let r = apply_channel(&s, &h1.merged(&h2), &p).unwrap();
            let r1 = apply_channel(&s, &h1, &p).unwrap();
            let r2 = apply_channel(&s, &h2, &p).unwrap();
            for i in 0..36 {
                prop_assert!((r.samples[i] - r1.samples[i] - r2.samples[i]).norm() <= 1e-12);
            }
        }
    }
}
