//! Joint timing synchronization and channel estimation from the MLS pilot
//! row.
//!
//! Candidate start indices `n~` are scanned in order. For each candidate the
//! samples `r[n~ + nM]` are multiplied by the local sequence and transformed;
//! a candidate whose spectrum is concentrated in one bin (timing metric above
//! the threshold) is a pilot copy. The first crossing fixes the timing
//! offset, and the following `L` candidates are checked for further delay
//! taps. Doppler and gain of each detected tap come from the same product
//! row in closed form.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::channel::{ChannelParamSet, ChannelPath};
use crate::error::{Error, Result};
use crate::modem::{OtfsParams, TimeSeries};
use crate::pilot::{MlsConfig, MlsSequence};

/// Default timing-metric threshold `8 / N`.
pub fn default_threshold(n: usize) -> f64 {
    8.0 / n as f64
}

/// Receiver settings for the scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncConfig {
    pub threshold: f64,
    pub l_mls: usize,
    /// Number of candidates examined after the first crossing (`L`).
    pub guard: usize,
    pub rcp_len: usize,
    /// Candidates scanned before giving up when nothing crosses.
    pub search_limit: usize,
}

impl SyncConfig {
    /// Threshold `8/N`, and a search window covering offsets below
    /// `max_theta`.
    pub fn new(params: &OtfsParams, mls: &MlsConfig, max_theta: usize) -> Self {
        Self {
            threshold: default_threshold(params.n),
            l_mls: mls.l_mls,
            guard: mls.guard,
            rcp_len: params.rcp_len,
            search_limit: max_theta + params.rcp_len + mls.l_mls + mls.guard + 1,
        }
    }

    pub fn with_threshold(self, threshold: f64) -> Self {
        Self { threshold, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidParams(format!(
                "threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        if self.search_limit < self.rcp_len + self.l_mls {
            return Err(Error::InvalidParams(
                "search limit does not reach the pilot row".into(),
            ));
        }
        Ok(())
    }
}

/// Product row `q`, its unnormalized DFT `Q` and the timing metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub q: Vec<Complex64>,
    pub spectrum: Vec<Complex64>,
    pub alpha: f64,
}

/// Output of a successful scan.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncResult {
    /// Estimated offset in samples (buffer index of the prefix start).
    pub theta_hat: i64,
    pub paths: ChannelParamSet,
    /// `(n~, alpha(n~))` for every scanned candidate.
    pub metric_trace: Vec<(usize, f64)>,
}

impl SyncResult {
    /// Buffer index of the first post-prefix sample.
    pub fn frame_start(&self, rcp_len: usize) -> i64 {
        self.theta_hat + rcp_len as i64
    }
}

/// Timing metric `max |Q| / sum |Q|`, zero for an all-zero spectrum.
pub fn timing_metric(spectrum: &[Complex64]) -> f64 {
    let (max, sum) = spectrum
        .iter()
        .map(|z| z.norm())
        .fold((0.0f64, 0.0f64), |(m, s), v| (m.max(v), s + v));
    if sum > 0.0 {
        max / sum
    } else {
        0.0
    }
}

/// Correlates received rows against a fixed MLS.
#[derive(Clone)]
pub struct Correlator {
    m: usize,
    mn: usize,
    seq: Vec<f64>,
    total_power: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Correlator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Correlator")
            .field("m", &self.m)
            .field("n", &self.seq.len())
            .finish()
    }
}

impl Correlator {
    pub fn new(mls: &MlsSequence, params: &OtfsParams) -> Self {
        Self {
            m: params.m,
            mn: params.frame_len(),
            seq: mls.x_tilde.clone(),
            total_power: mls.total_power,
            fft: FftPlanner::new().plan_fft_forward(mls.n()),
        }
    }

    fn n(&self) -> usize {
        self.seq.len()
    }

    /// Whether the buffer holds every sample needed at candidate `n_tilde`.
    pub fn fits(&self, r: &TimeSeries, n_tilde: usize) -> bool {
        n_tilde + (self.n() - 1) * self.m < r.len()
    }

    pub fn correlate(&self, r: &TimeSeries, n_tilde: usize) -> Result<CorrelationRow> {
        let last = n_tilde + (self.n() - 1) * self.m;
        if last >= r.len() {
            return Err(Error::InsufficientSamples {
                needed: last,
                available: r.len(),
            });
        }
        let q: Vec<Complex64> = self
            .seq
            .iter()
            .enumerate()
            .map(|(n, &x)| r.samples[n_tilde + n * self.m] * x)
            .collect();
        let mut spectrum = q.clone();
        self.fft.process(&mut spectrum);
        let alpha = timing_metric(&spectrum);
        Ok(CorrelationRow { q, spectrum, alpha })
    }

    /// Path `(l, k^, h^)` from a detected row, gain de-rotated to the frame
    /// start.
    pub fn estimate_path(
        &self,
        q: &[Complex64],
        delay: usize,
        l_mls: usize,
    ) -> Result<ChannelPath> {
        let k = estimate_doppler(q)?;
        let g = raw_gain(q, k, self.total_power);
        let back = Complex64::from_polar(1.0, -2.0 * PI * k * l_mls as f64 / self.mn as f64);
        Ok(ChannelPath::new(delay, k, g * back))
    }
}

/// `q[n] = r[n~ + nM] x~[n]` and its unnormalized DFT.
pub fn correlate_row(
    r: &TimeSeries,
    n_tilde: usize,
    mls: &MlsSequence,
    params: &OtfsParams,
) -> Result<CorrelationRow> {
    Correlator::new(mls, params).correlate(r, n_tilde)
}

/// Phase-increment Doppler estimate
/// `k^ = N / ((N - 2) 2 pi) sum_{n=0}^{N-3} arg(q[n+1] q*[n])`.
pub fn estimate_doppler(q: &[Complex64]) -> Result<f64> {
    let n = q.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("row of length {n} is too short")));
    }
    if let Some(i) = q[..n - 1].iter().position(|z| z.norm_sqr() == 0.0) {
        return Err(Error::Degenerate(format!("q[{i}] is zero")));
    }
    let sum: f64 = q[..n - 1]
        .windows(2)
        .map(|w| (w[1] * w[0].conj()).arg())
        .sum();
    Ok(n as f64 / ((n - 2) as f64 * 2.0 * PI) * sum)
}

fn raw_gain(q: &[Complex64], k_hat: f64, total_power: f64) -> Complex64 {
    let n = q.len();
    let w = -2.0 * PI * k_hat / n as f64;
    q[..n - 1]
        .iter()
        .enumerate()
        .map(|(i, z)| z * Complex64::from_polar(1.0, w * i as f64))
        .sum::<Complex64>()
        / total_power
}

/// `h^ = P^{-1} sum_{n=0}^{N-2} q[n] e^{-j 2 pi k^ n / N}`, de-rotated by
/// `e^{-j 2 pi k^ l_mls / MN}` so it matches the channel's path gain.
pub fn estimate_gain(
    q: &[Complex64],
    k_hat: f64,
    total_power: f64,
    l_mls: usize,
    params: &OtfsParams,
) -> Complex64 {
    let back = -2.0 * PI * k_hat * l_mls as f64 / params.frame_len() as f64;
    raw_gain(q, k_hat, total_power) * Complex64::from_polar(1.0, back)
}

/// Scans the buffer and returns the timing offset and detected paths.
pub fn run_jtsce(
    r: &TimeSeries,
    mls: &MlsSequence,
    cfg: &SyncConfig,
    params: &OtfsParams,
) -> Result<SyncResult> {
    cfg.validate()?;
    let corr = Correlator::new(mls, params);
    let base = cfg.l_mls + cfg.rcp_len;
    let mut stop = cfg.search_limit;
    let mut first: Option<usize> = None;
    let mut paths = Vec::new();
    let mut trace = Vec::new();
    let mut n_tilde = 0;
    while n_tilde < stop && corr.fits(r, n_tilde) {
        let row = corr.correlate(r, n_tilde)?;
        trace.push((n_tilde, row.alpha));
        if row.alpha > cfg.threshold {
            let start = *first.get_or_insert_with(|| {
                stop = n_tilde + cfg.guard + 1;
                n_tilde
            });
            paths.push(corr.estimate_path(&row.q, n_tilde - start, cfg.l_mls)?);
        }
        n_tilde += 1;
    }
    match first {
        Some(start) => Ok(SyncResult {
            theta_hat: start as i64 - base as i64,
            paths: ChannelParamSet::new(paths),
            metric_trace: trace,
        }),
        None => Err(Error::SyncFailure {
            scanned: trace.len(),
        }),
    }
}

/// Timing metric for every candidate in `range` that fits the buffer.
pub fn metric_trace(
    r: &TimeSeries,
    mls: &MlsSequence,
    params: &OtfsParams,
    range: std::ops::Range<usize>,
) -> Vec<(usize, f64)> {
    let corr = Correlator::new(mls, params);
    range
        .take_while(|&n| corr.fits(r, n))
        .map(|n| (n, corr.correlate(r, n).expect("fits").alpha))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tone(a: Complex64, k: f64, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| a * Complex64::from_polar(1.0, 2.0 * PI * k * i as f64 / n as f64))
            .collect()
    }

    #[test]
    fn default_threshold_values() {
        assert_eq!(default_threshold(32), 0.25);
        assert_eq!(default_threshold(64), 0.125);
    }

    #[test]
    fn doppler_of_half_bin_tone() {
        let k = estimate_doppler(&tone(Complex64::new(1.0, 0.0), 2.5, 32)).unwrap();
        assert!((k - 2.5).abs() < 1e-12);
        let flat = vec![Complex64::new(0.3, -0.7); 32];
        assert!(estimate_doppler(&flat).unwrap().abs() < 1e-15);
    }

    #[test]
    fn doppler_rejects_zero_samples() {
        let mut q = tone(Complex64::new(1.0, 0.0), 1.0, 16);
        q[15] = Complex64::new(0.0, 0.0);
        assert!(estimate_doppler(&q).is_ok());
        q[4] = Complex64::new(0.0, 0.0);
        assert!(matches!(estimate_doppler(&q), Err(Error::Degenerate(_))));
    }

    #[test]
    fn gain_is_linear_in_q() {
        let params = OtfsParams::paper();
        let q = tone(Complex64::new(0.2, 0.9), 1.3, 32);
        let g = estimate_gain(&q, 1.3, 5.0, 10, &params);
        let scaled: Vec<_> = q.iter().map(|z| z * 2.5).collect();
        let g2 = estimate_gain(&scaled, 1.3, 5.0, 10, &params);
        assert!((g2 - g * 2.5).norm() < 1e-12);
    }

    #[test]
    fn metric_of_flat_and_empty_spectra() {
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(timing_metric(&[z; 8]), 0.0);
        assert_eq!(timing_metric(&[Complex64::new(1.0, 0.0); 4]), 0.25);
        let mut one = [z; 8];
        one[3] = Complex64::new(0.0, 2.0);
        assert_eq!(timing_metric(&one), 1.0);
    }

    #[test]
    fn config_validation() {
        let params = OtfsParams::paper();
        let mls = MlsConfig::new(&params, 31.0, 10, 10).unwrap();
        let cfg = SyncConfig::new(&params, &mls, 512);
        cfg.validate().unwrap();
        assert_eq!(cfg.threshold, 0.25);
        assert!(cfg.with_threshold(1.0).validate().is_err());
        assert!(cfg.with_threshold(0.0).validate().is_err());
    }

    proptest! {
        #[test]
        fn doppler_exact_for_any_tone(k in -15.9..15.9f64, re in -3.0..3.0f64, im in 0.1..3.0f64) {
            let q = tone(Complex64::new(re, im), k, 32);
            prop_assert!((estimate_doppler(&q).unwrap() - k).abs() <= 1e-12);
        }
    }
}
