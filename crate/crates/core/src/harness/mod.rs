//! Seeded Monte Carlo experiments, config files and CSV output.
//!
//! Every trial draws its channel, timing offset and data from a stream
//! seeded by `(master seed, trial index)`, and results are reduced in trial
//! order, so output depends only on the config and never on the number of
//! worker threads.

mod config;
mod experiments;
mod records;
mod seed;

pub use config::{
    load_config, save_config, BerSettings, ChannelSettings, ExperimentConfig, ExperimentKind,
    PilotSettings, Profile,
};
pub use experiments::{
    mls_power_for, noise_var_for, run_ber, run_experiment, run_mse, run_snapshot,
    run_sync_accuracy, run_threshold_sweep, RunOptions, Scenario, TrialContext, TxFrame,
};
pub use records::{
    emit_csv, BerRecord, MetricRecords, MseRecord, Scheme, SnapshotRow, SyncRecord, BER_HEADER,
    MSE_HEADER, SNAPSHOT_HEADER, SYNC_HEADER,
};
pub use seed::{trial_rng, trial_seed, Stream};
