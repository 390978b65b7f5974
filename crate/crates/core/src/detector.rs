//! Effective DD-domain channel and LMMSE detection.
//!
//! Two equivalent detectors are provided. [`lmmse_detect`] works on the
//! dense `MN x MN` DD-domain operator and serves as the reference.
//! [`BlockDetector`] solves the same problem in the time domain: the frame
//! operator is banded with bandwidth equal to the delay spread, and the zero
//! guard rows split the data samples into independent clusters, each solved
//! by a small Cholesky factorization.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::ChannelParamSet;
use crate::error::{Error, Result};
use crate::modem::{Constellation, DdGrid, DopplerTransform, OtfsParams};
use crate::pilot::FrameLayout;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Linear map from the vectorized transmitted DD grid to the vectorized
/// received DD grid, `vec[l N + k] = X[l, k]`.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    pub g: DMatrix<Complex64>,
    pub noise_var: f64,
}

impl EffectiveChannel {
    pub fn with_noise_var(self, noise_var: f64) -> Self {
        Self { noise_var, ..self }
    }

    pub fn apply(&self, x: &DdGrid) -> Vec<Complex64> {
        let v = DVector::from_column_slice(x.as_slice());
        (&self.g * v).as_slice().to_vec()
    }
}

/// Soft estimates, hard decisions and bits for the data cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub estimates: Vec<Complex64>,
    pub symbols: Vec<Complex64>,
    pub bits: Vec<u8>,
}

impl Detection {
    fn from_estimates(estimates: Vec<Complex64>, c: &Constellation) -> Self {
        let symbols = estimates.iter().map(|&z| c.slice(z)).collect::<Vec<_>>();
        let bits = c.demap(&symbols);
        Self {
            estimates,
            symbols,
            bits,
        }
    }
}

fn check_paths(h: &ChannelParamSet, params: &OtfsParams) -> Result<()> {
    match h.max_delay() {
        Some(d) if d > params.rcp_len => Err(Error::InvalidParams(format!(
            "delay tap {d} exceeds the RCP length {}",
            params.rcp_len
        ))),
        _ => Ok(()),
    }
}

/// `h e^{j 2 pi k (t - l) / MN}`, the weight of `s[t - l]` in `r[t]`.
#[derive(Debug, Clone, Copy)]
struct Tap {
    delay: usize,
    gain: Complex64,
    omega: f64,
}

impl Tap {
    fn from_set(h: &ChannelParamSet, mn: usize) -> Vec<Tap> {
        h.iter()
            .map(|p| Tap {
                delay: p.delay,
                gain: p.gain,
                omega: 2.0 * PI * p.doppler / mn as f64,
            })
            .collect()
    }

    fn coef(&self, t: usize) -> Complex64 {
        let e = t as i64 - self.delay as i64;
        self.gain * Complex64::from_polar(1.0, self.omega * e as f64)
    }
}

/// Cyclic frame operator `T s` over one prefix-stripped frame:
/// `(T s)[t] = sum_i h_i s[(t - l_i) mod MN] e^{j 2 pi k_i (t - l_i) / MN}`.
pub fn frame_operator(h: &ChannelParamSet, s: &[Complex64], params: &OtfsParams) -> Vec<Complex64> {
    let mn = params.frame_len();
    assert_eq!(s.len(), mn);
    let mut out = vec![ZERO; mn];
    for tap in Tap::from_set(h, mn) {
        for (t, r) in out.iter_mut().enumerate() {
            *r += tap.coef(t) * s[(t + mn - tap.delay) % mn];
        }
    }
    out
}

/// Dense time-domain matrix of [`frame_operator`].
pub fn time_domain_matrix(h: &ChannelParamSet, params: &OtfsParams) -> DMatrix<Complex64> {
    let mn = params.frame_len();
    let mut t = DMatrix::zeros(mn, mn);
    for tap in Tap::from_set(h, mn) {
        for row in 0..mn {
            t[(row, (row + mn - tap.delay) % mn)] += tap.coef(row);
        }
    }
    t
}

/// Unitary map from the vectorized DD grid to the serial frame.
pub fn dd_to_time_matrix(params: &OtfsParams) -> DMatrix<Complex64> {
    let (m, n) = (params.m, params.n);
    let scale = (n as f64).sqrt().recip();
    let mut u = DMatrix::zeros(m * n, m * n);
    for l in 0..m {
        for col in 0..n {
            for k in 0..n {
                let ph = 2.0 * PI * ((k * col) % n) as f64 / n as f64;
                u[(l + col * m, l * n + k)] = Complex64::from_polar(scale, ph);
            }
        }
    }
    u
}

/// `w(x) = N^{-1} sum_n e^{j 2 pi x n / N}` for `x = d + k`, `d in (-N, N)`.
fn dirichlet(k: f64, n: usize) -> Vec<Complex64> {
    (0..2 * n - 1)
        .map(|i| {
            let x = i as f64 - (n - 1) as f64 + k;
            (0..n)
                .map(|t| Complex64::from_polar(1.0, 2.0 * PI * x * t as f64 / n as f64))
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

/// DD-domain operator assembled path by path: row block `l` couples to
/// block `(l - l_i) mod M` through a Dirichlet kernel in Doppler, with an
/// extra `e^{-j 2 pi k' / N}` on rows fed through the cyclic prefix.
pub fn build_effective_channel(
    h: &ChannelParamSet,
    params: &OtfsParams,
) -> Result<EffectiveChannel> {
    check_paths(h, params)?;
    let (m, n) = (params.m, params.n);
    let mn = (m * n) as f64;
    let mut g = DMatrix::zeros(m * n, m * n);
    let wrap_phase: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect();
    for p in h {
        let w = dirichlet(p.doppler, n);
        for l in 0..m {
            let wrapped = l < p.delay;
            let src = (l + m - p.delay) % m;
            let e = l as f64 - p.delay as f64;
            let base = p.gain * Complex64::from_polar(1.0, 2.0 * PI * p.doppler * e / mn);
            for k in 0..n {
                for kp in 0..n {
                    let mut v = base * w[kp + n - 1 - k];
                    if wrapped {
                        v *= wrap_phase[kp];
                    }
                    g[(l * n + k, src * n + kp)] += v;
                }
            }
        }
    }
    Ok(EffectiveChannel { g, noise_var: 0.0 })
}

/// Subtracts the contribution of known symbols (pilot) from `y`.
pub fn cancel_known(y: &[Complex64], ch: &EffectiveChannel, known: &DdGrid) -> Vec<Complex64> {
    y.iter().zip(ch.apply(known)).map(|(a, b)| a - b).collect()
}

/// `x^_S = G_S^H (G_S G_S^H + s^2 I)^{-1} y`, with `G_S` the columns of `G`
/// at the data cells. With every cell in `data_positions` this is the
/// full-grid LMMSE estimate.
pub fn lmmse_detect(
    y: &[Complex64],
    ch: &EffectiveChannel,
    data_positions: &[(usize, usize)],
    n: usize,
    constellation: &Constellation,
) -> Result<Detection> {
    let dim = ch.g.nrows();
    if y.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            actual: y.len(),
        });
    }
    let cols: Vec<usize> = data_positions.iter().map(|&(l, k)| l * n + k).collect();
    let gs = ch.g.select_columns(&cols);
    let gs_h = gs.adjoint();
    let mut a = &gs * &gs_h;
    for i in 0..dim {
        a[(i, i)] += Complex64::new(ch.noise_var, 0.0);
    }
    let chol = a.cholesky().ok_or(Error::Singular)?;
    let z = chol.solve(&DVector::from_column_slice(y));
    let x = gs_h * z;
    Ok(Detection::from_estimates(
        x.as_slice().to_vec(),
        constellation,
    ))
}

/// Time-domain block LMMSE detector for frames whose data occupy whole DD
/// rows.
#[derive(Debug, Clone)]
pub struct BlockDetector {
    params: OtfsParams,
    data_rows: Vec<usize>,
    transform: DopplerTransform,
    constellation: Constellation,
}

impl BlockDetector {
    pub fn new(params: &OtfsParams, layout: &FrameLayout) -> Result<Self> {
        Ok(Self {
            params: *params,
            data_rows: layout.data_rows(),
            transform: DopplerTransform::new(params.n),
            constellation: Constellation::new(params.qam_order)?,
        })
    }

    /// Serial indices `l + nM` of the data cells, ascending.
    fn data_samples(&self) -> Vec<usize> {
        let m = self.params.m;
        let mut idx: Vec<usize> = (0..self.params.n)
            .flat_map(|col| self.data_rows.iter().map(move |&l| l + col * m))
            .collect();
        idx.sort_unstable();
        idx
    }

    /// Groups of data samples that the Gram matrix `T^H T` never couples.
    fn clusters(&self, spread: usize) -> Vec<Vec<usize>> {
        let idx = self.data_samples();
        let mn = self.params.frame_len();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for &i in &idx {
            match out.last_mut() {
                Some(c) if i - c.last().unwrap() <= spread => c.push(i),
                _ => out.push(vec![i]),
            }
        }
        if out.len() > 1 {
            let first = out[0][0];
            let last = *out.last().unwrap().last().unwrap();
            if first + mn - last <= spread {
                let head = out.remove(0);
                out.last_mut().unwrap().extend(head);
            }
        }
        out
    }

    /// Detects the data cells from `MN` prefix-stripped received samples,
    /// given a channel estimate, the noise variance and the known (pilot)
    /// DD grid.
    pub fn detect(
        &self,
        y: &[Complex64],
        h: &ChannelParamSet,
        noise_var: f64,
        known: &DdGrid,
    ) -> Result<Detection> {
        let p = &self.params;
        let mn = p.frame_len();
        if y.len() != mn {
            return Err(Error::LengthMismatch {
                expected: mn,
                actual: y.len(),
            });
        }
        check_paths(h, p)?;
        let known_t = crate::modem::serialize(&self.transform.dd_to_dt(known));
        let pilot_rx = frame_operator(h, &known_t.samples, p);
        let resid: Vec<Complex64> = y.iter().zip(&pilot_rx).map(|(a, b)| a - b).collect();

        let taps = Tap::from_set(h, mn);
        let spread = h.max_delay().unwrap_or(0);
        let mut s_hat = vec![ZERO; mn];
        let mut pos = vec![usize::MAX; mn];
        for cluster in self.clusters(spread) {
            let len = cluster.len();
            for (j, &a) in cluster.iter().enumerate() {
                pos[a] = j;
            }
            let mut gram = DMatrix::<Complex64>::zeros(len, len);
            let mut rhs = DVector::<Complex64>::zeros(len);
            for (ja, &a) in cluster.iter().enumerate() {
                for ti in &taps {
                    let t = (a + ti.delay) % mn;
                    let va = ti.coef(t).conj();
                    rhs[ja] += va * resid[t];
                    for tj in &taps {
                        let b = (t + mn - tj.delay) % mn;
                        let jb = pos[b];
                        if jb != usize::MAX {
                            gram[(ja, jb)] += va * tj.coef(t);
                        }
                    }
                }
                gram[(ja, ja)] += Complex64::new(noise_var, 0.0);
            }
            let chol = gram.cholesky().ok_or(Error::Singular)?;
            let sol = chol.solve(&rhs);
            for (j, &a) in cluster.iter().enumerate() {
                s_hat[a] = sol[j];
                pos[a] = usize::MAX;
            }
        }

        let (m, n) = (p.m, p.n);
        let mut rows: Vec<Complex64> = self
            .data_rows
            .iter()
            .flat_map(|&l| (0..n).map(move |col| (l, col)))
            .map(|(l, col)| s_hat[l + col * m])
            .collect();
        self.transform.forward_rows(&mut rows);
        Ok(Detection::from_estimates(rows, &self.constellation))
    }
}
