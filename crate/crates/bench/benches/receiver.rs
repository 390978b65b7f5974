use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use otfs_jtsce::channel::{apply_channel, gen_random_channel, impair, random_qam, ChannelParamSet};
use otfs_jtsce::detector::BlockDetector;
use otfs_jtsce::jtsce::{run_jtsce, SyncConfig};
use otfs_jtsce::modem::{
    modulate, Constellation, DdGrid, DopplerTransform, OtfsParams, TimeSeries,
};
use otfs_jtsce::pilot::{embed_pilot, MlsConfig, MlsSequence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Setup {
    params: OtfsParams,
    cfg: MlsConfig,
    mls: MlsSequence,
    known: DdGrid,
    channel: ChannelParamSet,
    tx: TimeSeries,
    rx: TimeSeries,
    theta: usize,
}

fn setup(params: OtfsParams, spread: usize) -> Setup {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let power = 31.0 * 300.0;
    let cfg = MlsConfig::new(&params, power, spread, spread).unwrap();
    let mls = MlsSequence::generate(params.n, power).unwrap();
    let q = Constellation::new(params.qam_order).unwrap();
    let data = random_qam(&q, cfg.layout(&params).data_len(), &mut rng);
    let grid = embed_pilot(&data, &mls, &cfg, &params).unwrap();
    let mut known = DdGrid::zeros(params.m, params.n);
    known
        .row_mut(cfg.l_mls)
        .copy_from_slice(grid.row(cfg.l_mls));
    let channel = gen_random_channel(6, spread, 4.0, true, &mut rng).unwrap();
    let tx = modulate(&grid, &params, &DopplerTransform::new(params.n));
    let theta = 3 * params.m + 5;
    let rx = impair(&tx, &channel, theta, 0.1, &params, &mut rng)
        .unwrap()
        .samples;
    Setup {
        params,
        cfg,
        mls,
        known,
        channel,
        tx,
        rx,
        theta,
    }
}

fn geometries() -> [(&'static str, OtfsParams, usize); 2] {
    let ci = OtfsParams {
        m: 32,
        n: 32,
        rcp_len: 8,
        ..OtfsParams::paper()
    };
    [("32x32", ci, 6), ("128x32", OtfsParams::paper(), 10)]
}

fn bench_sync(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_jtsce");
    for (name, params, spread) in geometries() {
        let s = setup(params, spread);
        let sync = SyncConfig::new(&s.params, &s.cfg, 4 * s.params.m);
        g.bench_function(name, |b| {
            b.iter(|| run_jtsce(black_box(&s.rx), &s.mls, &sync, &s.params).unwrap())
        });
    }
    g.finish();
}

fn bench_detect(c: &mut Criterion) {
    let mut g = c.benchmark_group("block_detect");
    g.sample_size(20);
    for (name, params, spread) in geometries() {
        let s = setup(params, spread);
        let det = BlockDetector::new(&s.params, &s.cfg.layout(&s.params)).unwrap();
        let y: Vec<Complex64> =
            s.rx.window((s.theta + s.params.rcp_len) as i64, s.params.frame_len());
        g.bench_function(name, |b| {
            b.iter(|| {
                det.detect(black_box(&y), &s.channel, 0.1, &s.known)
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn bench_channel(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply_channel");
    for (name, params, spread) in geometries() {
        let s = setup(params, spread);
        g.bench_function(name, |b| {
            b.iter(|| apply_channel(black_box(&s.tx), &s.channel, &s.params).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_sync, bench_detect, bench_channel);
criterion_main!(benches);
