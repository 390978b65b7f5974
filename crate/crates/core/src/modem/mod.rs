//! OTFS frame geometry, QAM mapping and the transform chain.
//!
//! Grids are stored row-major with the delay index `l` selecting the row and
//! the Doppler (or time) index selecting the column, so `vec(X)[l*N + k]`
//! addresses `X[l, k]`.

mod grid;
mod params;
mod qam;
mod transform;

pub use grid::{DdGrid, DtGrid, Grid, TimeSeries};
pub use params::OtfsParams;
pub use qam::{qam_demodulate, qam_modulate, Constellation};
pub use transform::{
    add_rcp, dd_to_dt, demodulate, deserialize, dt_to_dd, modulate, remove_rcp, serialize,
    DopplerTransform,
};
