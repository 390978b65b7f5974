use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// OTFS frame geometry.
///
/// `m` delay bins per DT column, `n` Doppler bins (equivalently time slots),
/// a reduced cyclic prefix of `rcp_len` samples per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtfsParams {
    pub m: usize,
    pub n: usize,
    pub rcp_len: usize,
    pub qam_order: u32,
    pub subcarrier_spacing_hz: f64,
    pub carrier_freq_hz: f64,
}

impl OtfsParams {
    pub fn new(m: usize, n: usize, rcp_len: usize) -> Result<Self> {
        let params = Self {
            m,
            n,
            rcp_len,
            qam_order: 4,
            subcarrier_spacing_hz: 15e3,
            carrier_freq_hz: 8e9,
        };
        params.validate()?;
        Ok(params)
    }

    /// 128 x 32 frame, RCP of M/4, 4-QAM, 15 kHz spacing at 8 GHz.
    pub fn paper() -> Self {
        Self {
            m: 128,
            n: 32,
            rcp_len: 32,
            qam_order: 4,
            subcarrier_spacing_hz: 15e3,
            carrier_freq_hz: 8e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParams("M must be positive".into()));
        }
        if !self.n.is_power_of_two() || self.n < 4 {
            return Err(Error::InvalidParams(format!(
                "N = {} must be a power of two >= 4",
                self.n
            )));
        }
        if self.rcp_len >= self.m {
            return Err(Error::InvalidParams(format!(
                "RCP length {} must be below M = {}",
                self.rcp_len, self.m
            )));
        }
        if !matches!(self.qam_order, 4 | 16 | 64) {
            return Err(Error::UnsupportedQamOrder(self.qam_order));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.subcarrier_spacing_hz) || !positive(self.carrier_freq_hz) {
            return Err(Error::InvalidParams(
                "subcarrier spacing and carrier frequency must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Samples per frame without the prefix (`M * N`).
    pub fn frame_len(&self) -> usize {
        self.m * self.n
    }

    /// Samples per frame including the prefix.
    pub fn prefixed_len(&self) -> usize {
        self.rcp_len + self.frame_len()
    }

    /// log2(N), the MLS register length.
    pub fn mls_order(&self) -> u32 {
        self.n.trailing_zeros()
    }

    /// Doppler resolution `Δf / N` in Hz.
    pub fn doppler_resolution_hz(&self) -> f64 {
        self.subcarrier_spacing_hz / self.n as f64
    }

    /// Delay resolution `T / M = 1 / (M Δf)` in seconds.
    pub fn delay_resolution_s(&self) -> f64 {
        1.0 / (self.m as f64 * self.subcarrier_spacing_hz)
    }

    /// Maximum Doppler shift, in Doppler bins, for a terminal moving at
    /// `speed_kmh`.
    pub fn doppler_index_for_speed(&self, speed_kmh: f64) -> f64 {
        let v = speed_kmh / 3.6;
        let nu_max = v * self.carrier_freq_hz / SPEED_OF_LIGHT;
        nu_max / self.doppler_resolution_hz()
    }
}
