use std::ops::RangeInclusive;

use num_complex::Complex64;

use super::mls::MlsSequence;
use crate::error::{Error, Result};
use crate::modem::{DdGrid, OtfsParams};

/// MLS pilot placement: register length, power, pilot row and guard
/// half-width `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlsConfig {
    pub order: u32,
    pub total_power: f64,
    pub l_mls: usize,
    pub guard: usize,
}

impl MlsConfig {
    pub fn new(params: &OtfsParams, total_power: f64, l_mls: usize, guard: usize) -> Result<Self> {
        let cfg = Self {
            order: params.mls_order(),
            total_power,
            l_mls,
            guard,
        };
        cfg.validate(params)?;
        Ok(cfg)
    }

    pub fn layout(&self, params: &OtfsParams) -> FrameLayout {
        FrameLayout::new(params.m, params.n, self.l_mls, self.guard)
    }

    /// Grid-fit checks.
    pub fn validate(&self, params: &OtfsParams) -> Result<()> {
        if 1usize << self.order != params.n {
            return Err(Error::InvalidParams(format!(
                "register length {} does not match N = {}",
                self.order, params.n
            )));
        }
        if self.total_power.is_nan() || self.total_power <= 0.0 {
            return Err(Error::InvalidParams("MLS power must be positive".into()));
        }
        if self.l_mls < self.guard || self.l_mls + self.guard >= params.m {
            return Err(Error::InvalidParams(format!(
                "guard band {}..={} does not fit {} rows",
                self.l_mls as i64 - self.guard as i64,
                self.l_mls + self.guard,
                params.m
            )));
        }
        Ok(())
    }

    /// Checks that a channel with delay spread `l_max` stays inside the guard
    /// band and the grid.
    pub fn check_delay_spread(&self, params: &OtfsParams, l_max: usize) -> Result<()> {
        if self.guard < l_max {
            return Err(Error::InvalidParams(format!(
                "guard half-width {} is below the delay spread {l_max}",
                self.guard
            )));
        }
        if self.l_mls + l_max >= params.m {
            return Err(Error::InvalidParams(
                "delayed pilot copies leave the grid".into(),
            ));
        }
        if l_max >= params.rcp_len {
            return Err(Error::InvalidParams(format!(
                "delay spread {l_max} must be below the RCP length {}",
                params.rcp_len
            )));
        }
        Ok(())
    }
}

/// Row layout of a frame with one pilot row and a zero guard band around it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLayout {
    pub m: usize,
    pub n: usize,
    pub pilot_row: usize,
    pub guard: usize,
}

impl FrameLayout {
    pub fn new(m: usize, n: usize, pilot_row: usize, guard: usize) -> Self {
        Self {
            m,
            n,
            pilot_row,
            guard,
        }
    }

    pub fn guard_rows(&self) -> RangeInclusive<usize> {
        self.pilot_row - self.guard..=self.pilot_row + self.guard
    }

    pub fn data_rows(&self) -> Vec<usize> {
        let g = self.guard_rows();
        (0..self.m).filter(|l| !g.contains(l)).collect()
    }

    /// Data cells in row-major raster order.
    pub fn data_positions(&self) -> Vec<(usize, usize)> {
        self.data_rows()
            .into_iter()
            .flat_map(|l| (0..self.n).map(move |k| (l, k)))
            .collect()
    }

    pub fn data_len(&self) -> usize {
        (self.m - (2 * self.guard + 1)) * self.n
    }

    /// Writes `data` into the data cells of `grid` in raster order.
    pub fn place(&self, grid: &mut DdGrid, data: &[Complex64]) -> Result<()> {
        if data.len() != self.data_len() {
            return Err(Error::LengthMismatch {
                expected: self.data_len(),
                actual: data.len(),
            });
        }
        for ((l, k), &z) in self.data_positions().into_iter().zip(data) {
            grid[(l, k)] = z;
        }
        Ok(())
    }

    /// Reads the data cells of `grid` in raster order.
    pub fn extract(&self, grid: &DdGrid) -> Vec<Complex64> {
        self.data_positions()
            .into_iter()
            .map(|pos| grid[pos])
            .collect()
    }
}

/// DD grid with the MLS pilot on row `l_mls`, zero guard rows and data
/// elsewhere. The pilot row holds the unitary DFT of `x_tilde`, so the
/// corresponding delay-time row is `x_tilde` itself.
pub fn embed_pilot(
    data: &[Complex64],
    mls: &MlsSequence,
    cfg: &MlsConfig,
    params: &OtfsParams,
) -> Result<DdGrid> {
    cfg.validate(params)?;
    if mls.n() != params.n {
        return Err(Error::LengthMismatch {
            expected: params.n,
            actual: mls.n(),
        });
    }
    let layout = cfg.layout(params);
    let mut grid = DdGrid::zeros(params.m, params.n);
    layout.place(&mut grid, data)?;
    grid.row_mut(cfg.l_mls).copy_from_slice(&pilot_row_dd(mls));
    Ok(grid)
}

/// Unitary DFT of `x_tilde`.
pub fn pilot_row_dd(mls: &MlsSequence) -> Vec<Complex64> {
    let n = mls.n();
    let t = crate::modem::DopplerTransform::new(n);
    let mut row: Vec<Complex64> = mls
        .x_tilde
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    t.forward_rows(&mut row);
    row
}

/// Data cell coordinates for a pilot configuration, in the order used by
/// [`embed_pilot`].
pub fn extract_data_positions(params: &OtfsParams, cfg: &MlsConfig) -> Vec<(usize, usize)> {
    cfg.layout(params).data_positions()
}
