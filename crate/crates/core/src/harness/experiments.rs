use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::records::{BerRecord, MetricRecords, MseRecord, Scheme, SnapshotRow, SyncRecord};
use super::seed::{trial_rng, Stream};
use crate::channel::{gen_random_channel, impair, ChannelParamSet, ImpairedSignal};
use crate::detector::BlockDetector;
use crate::epa::{epa_embed, epa_estimate, EpaConfig};
use crate::error::{Error, Result};
use crate::jtsce::{metric_trace, run_jtsce, Correlator, SyncConfig};
use crate::modem::{demodulate, modulate, Constellation, DdGrid, DopplerTransform, OtfsParams};
use crate::pilot::{embed_pilot, FrameLayout, MlsConfig, MlsSequence};

/// Execution settings that do not affect results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
}

/// Noise variance for a data SNR with unit-power data symbols.
pub fn noise_var_for(snr_d_db: f64) -> f64 {
    10f64.powf(-snr_d_db / 10.0)
}

/// Total MLS power giving a per-chip SNR of `snr_m_db` at `noise_var`.
pub fn mls_power_for(snr_m_db: f64, noise_var: f64, n: usize) -> f64 {
    (n - 1) as f64 * 10f64.powf(snr_m_db / 10.0) * noise_var
}

/// Random quantities shared by every operating point of one trial.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub channel: ChannelParamSet,
    pub theta: usize,
    pub bits: Vec<u8>,
    pub symbols: Vec<Complex64>,
}

/// A transmitted frame and what the receiver knows about it.
#[derive(Debug, Clone)]
pub struct TxFrame {
    pub grid: DdGrid,
    /// Pilot-only grid, subtracted before detection.
    pub known: DdGrid,
    pub mls: MlsSequence,
    pub mls_cfg: MlsConfig,
}

/// Fixed per-run objects: geometry, transforms and frame layout.
#[derive(Debug, Clone)]
pub struct TrialContext {
    pub cfg: ExperimentConfig,
    pub params: OtfsParams,
    pub transform: DopplerTransform,
    pub layout: FrameLayout,
    pub constellation: Constellation,
}

impl TrialContext {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let params = cfg.frame;
        let layout = cfg.mls_config(1.0)?.layout(&params);
        Ok(Self {
            cfg: cfg.clone(),
            params,
            transform: DopplerTransform::new(params.n),
            layout,
            constellation: Constellation::new(params.qam_order)?,
        })
    }

    pub fn scenario(&self, trial: u64) -> Result<Scenario> {
        let mut rng = trial_rng(self.cfg.seed, trial, Stream::Scenario);
        let ch = &self.cfg.channel;
        let channel = gen_random_channel(ch.paths, ch.l_max, ch.k_max, ch.fractional, &mut rng)?;
        let theta = rng.random_range(0..ch.max_theta);
        let nbits = self.layout.data_len() * self.constellation.bits_per_symbol();
        let bits: Vec<u8> = (0..nbits).map(|_| rng.random_range(0..2u8)).collect();
        let symbols = self.constellation.map(&bits)?;
        Ok(Scenario {
            channel,
            theta,
            bits,
            symbols,
        })
    }

    pub fn mls_frame(&self, symbols: &[Complex64], total_power: f64) -> Result<TxFrame> {
        let mls_cfg = self.cfg.mls_config(total_power)?;
        let mls = MlsSequence::generate(self.params.n, total_power)?;
        let grid = embed_pilot(symbols, &mls, &mls_cfg, &self.params)?;
        let mut known = DdGrid::zeros(self.params.m, self.params.n);
        known
            .row_mut(mls_cfg.l_mls)
            .copy_from_slice(grid.row(mls_cfg.l_mls));
        Ok(TxFrame {
            grid,
            known,
            mls,
            mls_cfg,
        })
    }

    /// Passes a DD grid through the timing offset, channel and noise of
    /// `sc`. Padding and noise come from the trial's noise stream, so every
    /// operating point of a trial sees the same unit-variance draws.
    pub fn transmit(
        &self,
        grid: &DdGrid,
        sc: &Scenario,
        noise_var: f64,
        trial: u64,
    ) -> Result<ImpairedSignal> {
        let tx = modulate(grid, &self.params, &self.transform);
        let mut rng = trial_rng(self.cfg.seed, trial, Stream::Noise);
        impair(
            &tx,
            &sc.channel,
            sc.theta,
            noise_var,
            &self.params,
            &mut rng,
        )
    }

    /// Buffer index of the first post-prefix sample for offset `theta`.
    pub fn frame_start(&self, theta: i64) -> i64 {
        theta + self.params.rcp_len as i64
    }

    /// Buffer index where the pilot copy of delay tap `l` begins.
    pub fn pilot_index(&self, theta: usize, delay: usize) -> usize {
        theta + self.params.rcp_len + self.cfg.pilot.l_mls + delay
    }

    pub fn sync_config(&self, mls_cfg: &MlsConfig, threshold: f64) -> SyncConfig {
        SyncConfig::new(&self.params, mls_cfg, self.cfg.channel.max_theta).with_threshold(threshold)
    }
}

fn pool(opts: &RunOptions) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs the experiment selected by `cfg.kind`.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<MetricRecords> {
    match cfg.kind {
        ExperimentKind::Snapshot => run_snapshot(cfg).map(MetricRecords::Snapshot),
        ExperimentKind::SyncAccuracy => run_sync_accuracy(cfg, opts).map(MetricRecords::Sync),
        ExperimentKind::ThresholdSweep => run_threshold_sweep(cfg, opts).map(MetricRecords::Sync),
        ExperimentKind::Mse => run_mse(cfg, opts).map(MetricRecords::Mse),
        ExperimentKind::Ber => run_ber(cfg, opts).map(MetricRecords::Ber),
    }
}

/// Timing-metric trace of one frame, from the buffer start to `4M + L`
/// candidates past the first pilot copy.
pub fn run_snapshot(cfg: &ExperimentConfig) -> Result<Vec<SnapshotRow>> {
    let ctx = TrialContext::new(cfg)?;
    let sc = ctx.scenario(0)?;
    let nv = noise_var_for(cfg.snr_data_db[0]);
    let frame = ctx.mls_frame(
        &sc.symbols,
        mls_power_for(cfg.snr_mls_db[0], nv, ctx.params.n),
    )?;
    let rx = ctx.transmit(&frame.grid, &sc, nv, 0)?;
    let first = ctx.pilot_index(sc.theta, 0);
    let end = first + 4 * ctx.params.m + cfg.pilot.guard + 1;
    let threshold = cfg.thresholds[0];
    Ok(metric_trace(&rx.samples, &frame.mls, &ctx.params, 0..end)
        .into_iter()
        .map(|(n_tilde, alpha)| SnapshotRow {
            n_tilde,
            alpha,
            threshold,
            above: u8::from(alpha > threshold),
            true_delay: sc
                .channel
                .iter()
                .find(|p| ctx.pilot_index(sc.theta, p.delay) == n_tilde)
                .map(|p| p.delay),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, Default)]
struct SyncCounts {
    to_correct: u64,
    to_delay_correct: u64,
    failures: u64,
}

fn sync_grid(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<SyncRecord>> {
    let ctx = TrialContext::new(cfg)?;
    let points: Vec<(f64, f64)> = cfg
        .snr_data_db
        .iter()
        .flat_map(|&d| cfg.snr_mls_db.iter().map(move |&m| (d, m)))
        .collect();
    let per_trial: Vec<Vec<SyncCounts>> = pool(opts)?.install(|| {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let sc = ctx.scenario(trial)?;
                let truth = sc.channel.delays();
                let mut out = Vec::with_capacity(points.len() * cfg.thresholds.len());
                for &(snr_d, snr_m) in &points {
                    let nv = noise_var_for(snr_d);
                    let frame =
                        ctx.mls_frame(&sc.symbols, mls_power_for(snr_m, nv, ctx.params.n))?;
                    let rx = ctx.transmit(&frame.grid, &sc, nv, trial)?;
                    for &t in &cfg.thresholds {
                        let sync = ctx.sync_config(&frame.mls_cfg, t);
                        let mut c = SyncCounts::default();
                        match run_jtsce(&rx.samples, &frame.mls, &sync, &ctx.params) {
                            Ok(res) => {
                                if res.theta_hat == sc.theta as i64 {
                                    c.to_correct = 1;
                                    if res.paths.delays() == truth {
                                        c.to_delay_correct = 1;
                                    }
                                }
                            }
                            Err(Error::SyncFailure { .. }) => c.failures = 1,
                            Err(e) => return Err(e),
                        }
                        out.push(c);
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::new();
    let mut idx = 0;
    for &(snr_d, snr_m) in &points {
        for &t in &cfg.thresholds {
            let mut sum = SyncCounts::default();
            for trial in &per_trial {
                sum.to_correct += trial[idx].to_correct;
                sum.to_delay_correct += trial[idx].to_delay_correct;
                sum.failures += trial[idx].failures;
            }
            let n = cfg.trials as u64;
            records.push(SyncRecord {
                snr_d_db: snr_d,
                snr_m_db: snr_m,
                threshold: t,
                trials: n,
                to_correct: sum.to_correct,
                to_delay_correct: sum.to_delay_correct,
                sync_failures: sum.failures,
                to_accuracy: sum.to_correct as f64 / n as f64,
                to_delay_accuracy: sum.to_delay_correct as f64 / n as f64,
            });
            idx += 1;
        }
    }
    Ok(records)
}

/// Fraction of trials with exact timing, and with exact timing and delay
/// set, for every (data SNR, MLS SNR) pair.
pub fn run_sync_accuracy(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<SyncRecord>> {
    sync_grid(cfg, opts)
}

/// Accuracy against the timing-metric threshold.
pub fn run_threshold_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<SyncRecord>> {
    sync_grid(cfg, opts)
}

/// Doppler and gain estimation error with genie timing and delays.
pub fn run_mse(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<MseRecord>> {
    let ctx = TrialContext::new(cfg)?;
    let points: Vec<(f64, f64)> = cfg
        .snr_data_db
        .iter()
        .flat_map(|&d| cfg.snr_mls_db.iter().map(move |&m| (d, m)))
        .collect();
    let per_trial: Vec<Vec<(u64, f64, f64)>> = pool(opts)?.install(|| {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let sc = ctx.scenario(trial)?;
                points
                    .iter()
                    .map(|&(snr_d, snr_m)| {
                        let nv = noise_var_for(snr_d);
                        let frame =
                            ctx.mls_frame(&sc.symbols, mls_power_for(snr_m, nv, ctx.params.n))?;
                        let rx = ctx.transmit(&frame.grid, &sc, nv, trial)?;
                        let corr = Correlator::new(&frame.mls, &ctx.params);
                        let mut acc = (0u64, 0.0, 0.0);
                        for p in &sc.channel {
                            let row =
                                corr.correlate(&rx.samples, ctx.pilot_index(sc.theta, p.delay))?;
                            let est = corr.estimate_path(&row.q, p.delay, cfg.pilot.l_mls)?;
                            acc.0 += 1;
                            acc.1 += (est.doppler - p.doppler).powi(2);
                            acc.2 += (est.gain - p.gain).norm_sqr();
                        }
                        Ok(acc)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(points
        .iter()
        .enumerate()
        .map(|(i, &(snr_d, snr_m))| {
            let (mut n, mut dk, mut dh) = (0u64, 0.0, 0.0);
            for trial in &per_trial {
                n += trial[i].0;
                dk += trial[i].1;
                dh += trial[i].2;
            }
            MseRecord {
                snr_d_db: snr_d,
                snr_m_db: snr_m,
                trials: cfg.trials as u64,
                path_estimates: n,
                doppler_sq_err_sum: dk,
                gain_sq_err_sum: dh,
                doppler_mse: dk / n as f64,
                gain_mse: dh / n as f64,
            }
        })
        .collect())
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Bit errors of one frame for every curve at one data SNR, in the order
/// perfect CSI, JTSCE per MLS SNR, EPA per MLS SNR.
fn ber_frame(
    ctx: &TrialContext,
    det: &BlockDetector,
    sc: &Scenario,
    snr_d: f64,
    trial: u64,
) -> Result<Vec<u64>> {
    let cfg = &ctx.cfg;
    let p = &ctx.params;
    let nv = noise_var_for(snr_d);
    let mn = p.frame_len();
    let mut perfect = None;
    let mut jtsce = Vec::new();
    let mut epa = Vec::new();
    for &snr_m in &cfg.snr_mls_db {
        let power = mls_power_for(snr_m, nv, p.n);
        let frame = ctx.mls_frame(&sc.symbols, power)?;
        let rx = ctx.transmit(&frame.grid, sc, nv, trial)?;
        if perfect.is_none() {
            let y = rx.samples.window(ctx.frame_start(sc.theta as i64), mn);
            let d = det.detect(&y, &sc.channel, nv, &frame.known)?;
            perfect = Some(count_errors(&d.bits, &sc.bits));
        }
        let sync = ctx.sync_config(&frame.mls_cfg, cfg.thresholds[0]);
        let (start, est) = match run_jtsce(&rx.samples, &frame.mls, &sync, p) {
            Ok(res) => (res.frame_start(p.rcp_len), res.paths),
            Err(Error::SyncFailure { .. }) => (ctx.frame_start(0), ChannelParamSet::default()),
            Err(e) => return Err(e),
        };
        let d = det.detect(&rx.samples.window(start, mn), &est, nv, &frame.known)?;
        jtsce.push(count_errors(&d.bits, &sc.bits));

        let epa_cfg = EpaConfig::matched(p, &frame.mls_cfg, cfg.channel.k_max, nv)?;
        let grid = epa_embed(&sc.symbols, &epa_cfg, p)?;
        let rx = ctx.transmit(&grid, sc, nv, trial)?;
        let start = ctx.frame_start(sc.theta as i64);
        let est = epa_estimate(
            &demodulate(&rx.samples, start, p, &ctx.transform),
            &epa_cfg,
            p,
        );
        let d = det.detect(
            &rx.samples.window(start, mn),
            &est,
            nv,
            &epa_cfg.pilot_grid(p),
        )?;
        epa.push(count_errors(&d.bits, &sc.bits));
    }
    let mut out = vec![perfect.unwrap_or(0)];
    out.extend(jtsce);
    out.extend(epa);
    Ok(out)
}

/// Bit error rate of perfect CSI, JTSCE and the impulse-pilot baseline.
///
/// Frames run in batches of `ber.batch`; a data SNR stops once
/// `ber.min_frames` frames ran and every curve has `ber.min_errors` errors,
/// or once `ber.max_frames` frames were simulated.
pub fn run_ber(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<BerRecord>> {
    let ctx = TrialContext::new(cfg)?;
    let det = BlockDetector::new(&ctx.params, &ctx.layout)?;
    let curves = 1 + 2 * cfg.snr_mls_db.len();
    let nd = cfg.snr_data_db.len();
    let mut errors = vec![vec![0u64; curves]; nd];
    let mut frames = vec![0u64; nd];
    let mut active: Vec<usize> = (0..nd).collect();
    let pool = pool(opts)?;
    let mut next = 0u64;
    while !active.is_empty() {
        let batch = (cfg.ber.batch as u64).min(cfg.ber.max_frames as u64 - next);
        let results: Vec<Vec<Vec<u64>>> = pool.install(|| {
            (next..next + batch)
                .into_par_iter()
                .map(|trial| {
                    let sc = ctx.scenario(trial)?;
                    active
                        .iter()
                        .map(|&i| ber_frame(&ctx, &det, &sc, cfg.snr_data_db[i], trial))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for frame in &results {
            for (slot, &i) in active.iter().enumerate() {
                frames[i] += 1;
                for (acc, e) in errors[i].iter_mut().zip(&frame[slot]) {
                    *acc += e;
                }
            }
        }
        next += batch;
        let cap = next >= cfg.ber.max_frames as u64;
        let warm = next < cfg.ber.min_frames as u64;
        active.retain(|&i| !cap && (warm || errors[i].iter().any(|&e| e < cfg.ber.min_errors)));
    }

    let bits_per_frame = (ctx.layout.data_len() * ctx.constellation.bits_per_symbol()) as u64;
    let mut records = Vec::new();
    for (i, &snr_d) in cfg.snr_data_db.iter().enumerate() {
        let bits = frames[i] * bits_per_frame;
        let mut push = |scheme, snr_m, e: u64| {
            records.push(BerRecord {
                snr_d_db: snr_d,
                scheme,
                snr_m_db: snr_m,
                frames: frames[i],
                bits,
                bit_errors: e,
                ber: e as f64 / bits as f64,
            })
        };
        push(Scheme::PerfectCsi, None, errors[i][0]);
        let nm = cfg.snr_mls_db.len();
        for (j, &snr_m) in cfg.snr_mls_db.iter().enumerate() {
            push(Scheme::Jtsce, Some(snr_m), errors[i][1 + j]);
        }
        for (j, &snr_m) in cfg.snr_mls_db.iter().enumerate() {
            push(Scheme::Epa, Some(snr_m), errors[i][1 + nm + j]);
        }
    }
    Ok(records)
}
