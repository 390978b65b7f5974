use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{DdGrid, DtGrid, Grid, TimeSeries};
use super::params::OtfsParams;
use crate::error::{Error, Result};

/// Unitary length-`N` DFT pair applied along each grid row.
///
/// Plans are built once and shared, so a single instance can be reused
/// across frames and threads.
#[derive(Clone)]
pub struct DopplerTransform {
    n: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DopplerTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DopplerTransform")
            .field("n", &self.n)
            .finish()
    }
}

impl DopplerTransform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            scale: (n as f64).sqrt().recip(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// In-place unitary inverse DFT over consecutive length-`N` chunks.
    pub fn inverse_rows(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        data.iter_mut().for_each(|z| *z *= self.scale);
    }

    /// In-place unitary forward DFT over consecutive length-`N` chunks.
    pub fn forward_rows(&self, data: &mut [Complex64]) {
        self.forward.process(data);
        data.iter_mut().for_each(|z| *z *= self.scale);
    }

    /// Unnormalized forward DFT of one length-`N` buffer.
    pub fn forward_raw(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    pub fn dd_to_dt(&self, x: &DdGrid) -> DtGrid {
        assert_eq!(x.n(), self.n, "grid width must match transform length");
        let mut out = x.0.clone();
        self.inverse_rows(out.as_mut_slice());
        DtGrid(out)
    }

    pub fn dt_to_dd(&self, x: &DtGrid) -> DdGrid {
        assert_eq!(x.n(), self.n, "grid width must match transform length");
        let mut out = x.0.clone();
        self.forward_rows(out.as_mut_slice());
        DdGrid(out)
    }
}

/// `X_DT[l, n] = N^{-1/2} sum_k X_DD[l, k] e^{j 2 pi k n / N}`.
pub fn dd_to_dt(x: &DdGrid) -> DtGrid {
    DopplerTransform::new(x.n()).dd_to_dt(x)
}

pub fn dt_to_dd(x: &DtGrid) -> DdGrid {
    DopplerTransform::new(x.n()).dt_to_dd(x)
}

/// Column-wise read-out, `s[l + nM] = X_DT[l, n]`.
pub fn serialize(x: &DtGrid) -> TimeSeries {
    let (m, n) = (x.m(), x.n());
    let mut samples = Vec::with_capacity(m * n);
    for col in 0..n {
        samples.extend((0..m).map(|l| x[(l, col)]));
    }
    TimeSeries::new(samples)
}

pub fn deserialize(s: &TimeSeries, params: &OtfsParams) -> Result<DtGrid> {
    let (m, n) = (params.m, params.n);
    if s.len() != m * n {
        return Err(Error::LengthMismatch {
            expected: m * n,
            actual: s.len(),
        });
    }
    let mut g = Grid::zeros(m, n);
    for (i, &z) in s.samples.iter().enumerate() {
        g[(i % m, i / m)] = z;
    }
    Ok(DtGrid(g))
}

/// Prepends the last `rcp_len` samples of a bare frame.
pub fn add_rcp(s: &TimeSeries, rcp_len: usize) -> Result<TimeSeries> {
    if rcp_len > s.len() {
        return Err(Error::LengthMismatch {
            expected: rcp_len,
            actual: s.len(),
        });
    }
    let mut samples = Vec::with_capacity(s.len() + rcp_len);
    samples.extend_from_slice(&s.samples[s.len() - rcp_len..]);
    samples.extend_from_slice(&s.samples);
    Ok(TimeSeries::with_start(samples, s.start - rcp_len as i64))
}

pub fn remove_rcp(r: &TimeSeries, rcp_len: usize) -> Result<TimeSeries> {
    if rcp_len > r.len() {
        return Err(Error::LengthMismatch {
            expected: rcp_len,
            actual: r.len(),
        });
    }
    Ok(TimeSeries::with_start(
        r.samples[rcp_len..].to_vec(),
        r.start + rcp_len as i64,
    ))
}

/// DD grid to a prefixed serial frame whose first post-prefix sample has
/// time index 0.
pub fn modulate(x: &DdGrid, params: &OtfsParams, t: &DopplerTransform) -> TimeSeries {
    add_rcp(&serialize(&t.dd_to_dt(x)), params.rcp_len).expect("prefix shorter than frame")
}

/// Reads `M N` samples starting at buffer index `frame_start` and returns the
/// DD grid. Samples outside the buffer read as zero.
pub fn demodulate(
    r: &TimeSeries,
    frame_start: i64,
    params: &OtfsParams,
    t: &DopplerTransform,
) -> DdGrid {
    let s = TimeSeries::new(r.window(frame_start, params.frame_len()));
    t.dt_to_dd(&deserialize(&s, params).expect("window has frame length"))
}
