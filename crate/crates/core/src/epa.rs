//! Embedded impulse-pilot channel estimation baseline.
//!
//! A single DD impulse sits inside the same zero guard band used by the MLS
//! frame, so both schemes carry identical data cells. The receiver
//! thresholds the pilot neighbourhood and reports one integer-tap path per
//! bin above threshold.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{ChannelParamSet, ChannelPath};
use crate::error::{Error, Result};
use crate::modem::{DdGrid, OtfsParams};
use crate::pilot::{FrameLayout, MlsConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpaConfig {
    /// Energy of the impulse, `|x_p|^2`.
    pub pilot_power: f64,
    pub pilot_row: usize,
    pub pilot_bin: usize,
    /// Guard half-width `L`, also the largest delay tap searched.
    pub guard: usize,
    /// Largest Doppler tap searched on either side of the pilot bin.
    pub doppler_span: usize,
    /// Magnitude threshold on received bins.
    pub detect_threshold: f64,
}

impl EpaConfig {
    /// Pilot with the same total power and row as the MLS, placed in the
    /// centre Doppler bin, thresholded at `3 sigma`.
    pub fn matched(
        params: &OtfsParams,
        mls: &MlsConfig,
        k_max: f64,
        noise_var: f64,
    ) -> Result<Self> {
        let cfg = Self {
            pilot_power: mls.total_power,
            pilot_row: mls.l_mls,
            pilot_bin: params.n / 2,
            guard: mls.guard,
            doppler_span: k_max.ceil() as usize,
            detect_threshold: 3.0 * noise_var.sqrt(),
        };
        cfg.validate(params)?;
        Ok(cfg)
    }

    pub fn validate(&self, params: &OtfsParams) -> Result<()> {
        if self.pilot_power.is_nan() || self.pilot_power <= 0.0 {
            return Err(Error::InvalidParams("pilot power must be positive".into()));
        }
        if self.pilot_row < self.guard || self.pilot_row + self.guard >= params.m {
            return Err(Error::InvalidParams(
                "pilot guard band does not fit the grid".into(),
            ));
        }
        if self.pilot_bin >= params.n || 2 * self.doppler_span + 1 > params.n {
            return Err(Error::InvalidParams(
                "pilot Doppler window does not fit the grid".into(),
            ));
        }
        Ok(())
    }

    pub fn layout(&self, params: &OtfsParams) -> FrameLayout {
        FrameLayout::new(params.m, params.n, self.pilot_row, self.guard)
    }

    /// Pilot-only DD grid.
    pub fn pilot_grid(&self, params: &OtfsParams) -> DdGrid {
        let mut g = DdGrid::zeros(params.m, params.n);
        g[(self.pilot_row, self.pilot_bin)] = Complex64::new(self.pilot_power.sqrt(), 0.0);
        g
    }
}

/// DD grid with the impulse pilot, zero guard rows and data elsewhere.
pub fn epa_embed(data: &[Complex64], cfg: &EpaConfig, params: &OtfsParams) -> Result<DdGrid> {
    cfg.validate(params)?;
    let mut g = cfg.pilot_grid(params);
    cfg.layout(params).place(&mut g, data)?;
    Ok(g)
}

/// Threshold detection over delays `0..=L` and Doppler taps within
/// `+-doppler_span` of the pilot bin.
pub fn epa_estimate(y: &DdGrid, cfg: &EpaConfig, params: &OtfsParams) -> ChannelParamSet {
    let n = params.n as i64;
    let mn = params.frame_len() as f64;
    let amp = cfg.pilot_power.sqrt();
    let span = cfg.doppler_span as i64;
    let mut paths = Vec::new();
    for l in 0..=cfg.guard {
        for k in -span..=span {
            let bin = (cfg.pilot_bin as i64 + k).rem_euclid(n) as usize;
            let v = y[(cfg.pilot_row + l, bin)];
            if v.norm() > cfg.detect_threshold {
                let rot =
                    Complex64::from_polar(amp, 2.0 * PI * k as f64 * cfg.pilot_row as f64 / mn);
                paths.push(ChannelPath::new(l, k as f64, v / rot));
            }
        }
    }
    ChannelParamSet::new(paths)
}

/// Per-symbol pilot SNR in dB for a given MLS SNR: the impulse carries the
/// whole MLS energy in one cell.
pub fn pilot_snr_db(mls_snr_db: f64, n: usize) -> f64 {
    mls_snr_db + 10.0 * ((n - 1) as f64).log10()
}
