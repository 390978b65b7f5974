use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Timing-metric sample for one candidate start index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotRow {
    pub n_tilde: usize,
    pub alpha: f64,
    pub threshold: f64,
    pub above: u8,
    /// Delay tap whose pilot copy starts at this index, if any.
    pub true_delay: Option<usize>,
}

/// Timing and delay detection counts at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncRecord {
    pub snr_d_db: f64,
    pub snr_m_db: f64,
    pub threshold: f64,
    pub trials: u64,
    pub to_correct: u64,
    pub to_delay_correct: u64,
    pub sync_failures: u64,
    pub to_accuracy: f64,
    pub to_delay_accuracy: f64,
}

/// Doppler and gain estimation error with genie timing and delays.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseRecord {
    pub snr_d_db: f64,
    pub snr_m_db: f64,
    pub trials: u64,
    pub path_estimates: u64,
    pub doppler_sq_err_sum: f64,
    pub gain_sq_err_sum: f64,
    pub doppler_mse: f64,
    pub gain_mse: f64,
}

/// Receiver variant in an error-rate run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    PerfectCsi,
    Jtsce,
    Epa,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRecord {
    pub snr_d_db: f64,
    pub scheme: Scheme,
    /// MLS SNR of the pilot; empty for the perfect-CSI reference.
    pub snr_m_db: Option<f64>,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
}

pub const SNAPSHOT_HEADER: &str = "n_tilde,alpha,threshold,above,true_delay";
pub const SYNC_HEADER: &str = "snr_d_db,snr_m_db,threshold,trials,to_correct,to_delay_correct,\
sync_failures,to_accuracy,to_delay_accuracy";
pub const MSE_HEADER: &str = "snr_d_db,snr_m_db,trials,path_estimates,doppler_sq_err_sum,\
gain_sq_err_sum,doppler_mse,gain_mse";
pub const BER_HEADER: &str = "snr_d_db,scheme,snr_m_db,frames,bits,bit_errors,ber";

/// Output of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricRecords {
    Snapshot(Vec<SnapshotRow>),
    Sync(Vec<SyncRecord>),
    Mse(Vec<MseRecord>),
    Ber(Vec<BerRecord>),
}

impl MetricRecords {
    pub fn header(&self) -> &'static str {
        match self {
            Self::Snapshot(_) => SNAPSHOT_HEADER,
            Self::Sync(_) => SYNC_HEADER,
            Self::Mse(_) => MSE_HEADER,
            Self::Ber(_) => BER_HEADER,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Snapshot(r) => r.len(),
            Self::Sync(r) => r.len(),
            Self::Mse(r) => r.len(),
            Self::Ber(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match self {
            Self::Snapshot(r) => r.iter().try_for_each(|x| w.serialize(x))?,
            Self::Sync(r) => r.iter().try_for_each(|x| w.serialize(x))?,
            Self::Mse(r) => r.iter().try_for_each(|x| w.serialize(x))?,
            Self::Ber(r) => r.iter().try_for_each(|x| w.serialize(x))?,
        }
        if self.is_empty() {
            w.write_record(self.header().split(','))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

pub fn emit_csv(records: &MetricRecords, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    records.write_csv(std::io::BufWriter::new(file))
}
