//! OTFS baseband simulation with an MLS pilot used for joint time
//! synchronization and channel estimation.
//!
//! The crate is organized bottom-up:
//!
//! * [`modem`]: frame geometry, QAM mapping and the delay-Doppler /
//!   delay-time / serial-time transform chain with a reduced cyclic prefix.
//! * [`channel`]: the sampled doubly-selective channel, AWGN, timing-offset
//!   insertion, random channel draws and a delay-time domain oracle.
//! * [`pilot`]: maximum-length-sequence generation and frame assembly.
//! * [`jtsce`]: sliding correlation against the local MLS, timing-metric
//!   detection and closed-form Doppler / gain estimation.
//! * [`epa`]: embedded impulse-pilot baseline estimator.
//! * [`detector`]: effective channel construction and LMMSE detection.
//! * [`harness`]: seeded Monte Carlo experiments, config files and CSV output.

pub mod channel;
pub mod detector;
pub mod epa;
pub mod error;
pub mod harness;
pub mod jtsce;
pub mod modem;
pub mod pilot;

pub use num_complex::Complex64;

pub use channel::{ChannelParamSet, ChannelPath, ImpairedSignal};
pub use error::{Error, Result};
pub use jtsce::{CorrelationRow, SyncConfig, SyncResult};
pub use modem::{DdGrid, DtGrid, OtfsParams, TimeSeries};
pub use pilot::{FrameLayout, MlsConfig, MlsSequence};
