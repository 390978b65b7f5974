use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jtsce::default_threshold;
use crate::modem::OtfsParams;
use crate::pilot::MlsConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Snapshot,
    SyncAccuracy,
    ThresholdSweep,
    Mse,
    Ber,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        Self::Snapshot,
        Self::SyncAccuracy,
        Self::ThresholdSweep,
        Self::Mse,
        Self::Ber,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Snapshot => "snapshot",
            Self::SyncAccuracy => "sync_accuracy",
            Self::ThresholdSweep => "threshold_sweep",
            Self::Mse => "mse",
            Self::Ber => "ber",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Preset sizes: `ci` runs in seconds, `paper` uses the full 128 x 32 geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Ci,
    Paper,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Self::Ci),
            "paper" => Ok(Self::Paper),
            _ => Err(Error::Config(format!("unknown profile {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSettings {
    pub paths: usize,
    pub l_max: usize,
    pub k_max: f64,
    pub fractional: bool,
    /// Offsets are drawn uniformly from `0..max_theta`.
    pub max_theta: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotSettings {
    pub l_mls: usize,
    pub guard: usize,
}

/// Stopping rule for error-rate runs: frames are simulated in fixed-size
/// batches until at least `min_frames` frames ran and every curve has
/// `min_errors` bit errors, or `max_frames` frames have been simulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerSettings {
    pub min_errors: u64,
    pub min_frames: usize,
    pub max_frames: usize,
    pub batch: usize,
}

/// One Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub trials: usize,
    pub snr_data_db: Vec<f64>,
    pub snr_mls_db: Vec<f64>,
    /// Timing-metric thresholds (absolute, `8/N` is the default).
    pub thresholds: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub frame: OtfsParams,
    pub channel: ChannelSettings,
    pub pilot: PilotSettings,
    pub ber: BerSettings,
}

impl ExperimentConfig {
    pub fn preset(kind: ExperimentKind, profile: Profile) -> Self {
        let (frame, rcp_spread, trials) = match profile {
            Profile::Ci => (
                OtfsParams {
                    m: 32,
                    n: 32,
                    rcp_len: 8,
                    ..OtfsParams::paper()
                },
                6,
                200,
            ),
            Profile::Paper => (OtfsParams::paper(), 10, 500),
        };
        let n = frame.n as f64;
        let t0 = default_threshold(frame.n);
        let mut cfg = Self {
            kind,
            seed: 1,
            trials,
            snr_data_db: vec![10.0, 15.0, 20.0],
            snr_mls_db: vec![20.0, 25.0, 30.0, 35.0, 40.0],
            thresholds: vec![t0],
            output: None,
            frame,
            channel: ChannelSettings {
                paths: 6,
                l_max: rcp_spread,
                k_max: 4.0,
                fractional: true,
                max_theta: 4 * frame.m,
            },
            pilot: PilotSettings {
                l_mls: rcp_spread,
                guard: rcp_spread,
            },
            ber: BerSettings {
                min_errors: 100,
                min_frames: 100,
                max_frames: 2000,
                batch: 20,
            },
        };
        match kind {
            ExperimentKind::Snapshot => {
                cfg.channel.fractional = false;
                cfg.trials = 1;
                cfg.snr_data_db = vec![10.0];
                cfg.snr_mls_db = vec![30.0];
            }
            ExperimentKind::SyncAccuracy => cfg.channel.fractional = false,
            ExperimentKind::ThresholdSweep => {
                cfg.channel.fractional = false;
                cfg.snr_data_db = vec![20.0];
                cfg.snr_mls_db = vec![25.0, 35.0];
                cfg.thresholds = [0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 24.0]
                    .iter()
                    .map(|v| v / n)
                    .collect();
            }
            ExperimentKind::Mse => {
                cfg.trials = 2000usize.div_ceil(cfg.channel.paths);
                cfg.snr_data_db = vec![10.0];
            }
            ExperimentKind::Ber => {
                cfg.snr_data_db = vec![5.0, 10.0, 15.0];
                cfg.snr_mls_db = vec![25.0, 35.0];
            }
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.frame.validate()?;
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.snr_data_db.is_empty() || self.snr_mls_db.is_empty() || self.thresholds.is_empty() {
            return fail("SNR and threshold lists must be non-empty".into());
        }
        if let Some(t) = self.thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return fail(format!("threshold {t} outside (0, 1)"));
        }
        let ch = &self.channel;
        if ch.paths == 0 || ch.paths > ch.l_max + 1 {
            return fail(format!(
                "{} paths do not fit delays 0..={}",
                ch.paths, ch.l_max
            ));
        }
        if !(ch.k_max >= 0.0 && ch.k_max < self.frame.n as f64 / 2.0) {
            return fail(format!("k_max {} must lie in [0, N/2)", ch.k_max));
        }
        if ch.max_theta == 0 {
            return fail("max_theta must be at least 1".into());
        }
        if self.ber.batch == 0
            || self.ber.max_frames == 0
            || self.ber.min_frames > self.ber.max_frames
        {
            return fail("BER batch must be positive and min_frames <= max_frames".into());
        }
        let mls = self.mls_config(1.0)?;
        mls.check_delay_spread(&self.frame, ch.l_max)
    }

    /// Pilot placement for a given MLS power.
    pub fn mls_config(&self, total_power: f64) -> Result<MlsConfig> {
        MlsConfig::new(&self.frame, total_power, self.pilot.l_mls, self.pilot.guard)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies the keys of a (possibly partial) TOML document on top of
    /// `self`. Unknown keys are rejected.
    pub fn overlay(&self, text: &str) -> Result<Self> {
        let patch: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut base = toml::Table::try_from(self).expect("config serializes");
        merge(&mut base, patch);
        let cfg: Self = base
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn merge(base: &mut toml::Table, patch: toml::Table) {
    for (key, value) in patch {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(p)) => merge(b, p),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Reads a complete config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)
}

pub fn save_config(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    std::fs::write(path, cfg.to_toml())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for kind in ExperimentKind::ALL {
            for profile in [Profile::Ci, Profile::Paper] {
                ExperimentConfig::preset(kind, profile).validate().unwrap();
            }
        }
    }

    #[test]
    fn toml_roundtrip() {
        let cfg = ExperimentConfig::preset(ExperimentKind::ThresholdSweep, Profile::Paper);
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let cfg = ExperimentConfig::preset(ExperimentKind::Mse, Profile::Ci);
        let text = format!("{}\nbogus = 1\n", cfg.to_toml());
        assert!(matches!(
            ExperimentConfig::from_toml(&text),
            Err(Error::Config(_))
        ));
        assert!(cfg.overlay("[channel]\nspeed = 3\n").is_err());
        assert!(cfg.overlay("[frame]\nm = 64\nextra = true\n").is_err());
    }

    #[test]
    fn overlay_patches_nested_keys() {
        let cfg = ExperimentConfig::preset(ExperimentKind::Mse, Profile::Ci);
        let out = cfg
            .overlay("trials = 7\n[channel]\nfractional = false\n")
            .unwrap();
        assert_eq!(out.trials, 7);
        assert!(!out.channel.fractional);
        assert_eq!(out.channel.paths, cfg.channel.paths);
        assert_eq!(out.frame, cfg.frame);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let cfg = ExperimentConfig::preset(ExperimentKind::SyncAccuracy, Profile::Ci);
        assert!(cfg.overlay("trials = 0").is_err());
        assert!(cfg.overlay("snr_data_db = []").is_err());
        assert!(cfg.overlay("thresholds = [1.5]").is_err());
        assert!(cfg.overlay("[channel]\nl_max = 9\n").is_err());
        assert!(cfg.overlay("kind = \"nope\"").is_err());
    }
}
