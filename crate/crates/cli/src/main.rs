//! `otfs-sim`: runs one Monte Carlo experiment and writes a CSV plus a JSON
//! run manifest next to it.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use otfs_jtsce::harness::{
    emit_csv, run_experiment, ExperimentConfig, ExperimentKind, Profile, RunOptions,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "otfs-sim",
    version,
    about = "OTFS pilot synchronization and estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Timing-metric trace of a single frame.
    Snapshot(RunArgs),
    /// Timing and delay detection accuracy over data and MLS SNR.
    SyncAccuracy(RunArgs),
    /// Detection accuracy against the timing-metric threshold.
    ThresholdSweep(RunArgs),
    /// Doppler and gain estimation error with genie timing.
    Mse(RunArgs),
    /// Bit error rate of perfect CSI, JTSCE and the impulse-pilot baseline.
    Ber(RunArgs),
    /// Print the preset config for an experiment as TOML.
    PrintConfig {
        #[arg(value_enum)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = ProfileArg::Ci)]
        profile: ProfileArg,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file whose keys override the profile preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; the manifest is written alongside.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ProfileArg::Ci)]
    profile: ProfileArg,
    /// Worker threads (default: all cores). Does not change results.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Ci,
    Paper,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Ci => Profile::Ci,
            ProfileArg::Paper => Profile::Paper,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Snapshot,
    SyncAccuracy,
    ThresholdSweep,
    Mse,
    Ber,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Snapshot => ExperimentKind::Snapshot,
            KindArg::SyncAccuracy => ExperimentKind::SyncAccuracy,
            KindArg::ThresholdSweep => ExperimentKind::ThresholdSweep,
            KindArg::Mse => ExperimentKind::Mse,
            KindArg::Ber => ExperimentKind::Ber,
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    kind: ExperimentKind,
    profile: Profile,
    seed: u64,
    git_revision: String,
    wall_time_s: f64,
    rows: usize,
    csv: &'a Path,
    config: &'a ExperimentConfig,
}

fn git_revision() -> String {
    Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn resolve(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig> {
    let preset = ExperimentConfig::preset(kind, args.profile.into());
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            preset
                .overlay(&text)
                .with_context(|| format!("in config {}", path.display()))?
        }
        None => preset,
    };
    if cfg.kind != kind {
        bail!(
            "config is for experiment {} but {} was requested",
            cfg.kind,
            kind
        );
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<()> {
    let cfg = resolve(kind, &args)?;
    let out = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{kind}.csv")));
    let started = Instant::now();
    let records = run_experiment(
        &cfg,
        &RunOptions {
            workers: args.workers,
        },
    )?;
    let wall = started.elapsed().as_secs_f64();
    emit_csv(&records, &out).with_context(|| format!("writing {}", out.display()))?;
    let manifest = Manifest {
        kind,
        profile: args.profile.into(),
        seed: cfg.seed,
        git_revision: git_revision(),
        wall_time_s: wall,
        rows: records.len(),
        csv: &out,
        config: &cfg,
    };
    let mpath = manifest_path(&out);
    std::fs::write(&mpath, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", mpath.display()))?;
    eprintln!(
        "{kind}: {} rows -> {} ({wall:.1} s)",
        records.len(),
        out.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Cmd::Snapshot(a) => run(ExperimentKind::Snapshot, a),
        Cmd::SyncAccuracy(a) => run(ExperimentKind::SyncAccuracy, a),
        Cmd::ThresholdSweep(a) => run(ExperimentKind::ThresholdSweep, a),
        Cmd::Mse(a) => run(ExperimentKind::Mse, a),
        Cmd::Ber(a) => run(ExperimentKind::Ber, a),
        Cmd::PrintConfig { kind, profile } => {
            print!(
                "{}",
                ExperimentConfig::preset(kind.into(), profile.into()).to_toml()
            );
            Ok(())
        }
    }
}
