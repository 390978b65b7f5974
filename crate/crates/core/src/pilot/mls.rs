use crate::error::{Error, Result};

/// Primitive feedback polynomials for register lengths 2..=16, including
/// the `x^p` term. Each is the smallest primitive polynomial of its degree.
const PRIMITIVE_POLYS: [u32; 15] = [
    0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11d, 0x211, 0x409, 0x805, 0x1053, 0x201b, 0x402b, 0x8003,
    0x1002d,
];

/// Feedback polynomial used for register length `p`.
pub fn primitive_poly(p: u32) -> Result<u32> {
    if !(2..=16).contains(&p) {
        return Err(Error::UnsupportedRegisterLength(p));
    }
    Ok(PRIMITIVE_POLYS[p as usize - 2])
}

/// Galois linear-feedback shift register, seeded with the all-ones state.
#[derive(Debug, Clone)]
pub struct Lfsr {
    p: u32,
    poly: u32,
    state: u32,
}

impl Lfsr {
    pub fn new(p: u32) -> Result<Self> {
        Ok(Self {
            p,
            poly: primitive_poly(p)?,
            state: (1 << p) - 1,
        })
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    /// Emits the register's top bit and advances one step.
    pub fn step(&mut self) -> u8 {
        let out = (self.state >> (self.p - 1)) & 1;
        self.state <<= 1;
        if out == 1 {
            self.state ^= self.poly;
        }
        out as u8
    }
}

/// One period (`2^p - 1` bits) of the m-sequence for register length `p`.
pub fn gen_mls(p: u32) -> Result<Vec<u8>> {
    let mut reg = Lfsr::new(p)?;
    Ok((0..(1usize << p) - 1).map(|_| reg.step()).collect())
}

/// Bipolar, power-scaled MLS and its zero-padded length-`N` version.
#[derive(Debug, Clone, PartialEq)]
pub struct MlsSequence {
    /// `N - 1` entries of `+-sqrt(P / (N - 1))`.
    pub x: Vec<f64>,
    /// `x` followed by a single zero.
    pub x_tilde: Vec<f64>,
    pub total_power: f64,
}

impl MlsSequence {
    /// Full sequence for an `n`-point row (`n` a power of two).
    pub fn generate(n: usize, total_power: f64) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "N = {n} is not a power of two"
            )));
        }
        scale_and_pad(&gen_mls(n.trailing_zeros())?, total_power, n)
    }

    pub fn n(&self) -> usize {
        self.x_tilde.len()
    }

    /// Per-chip power `P / (N - 1)`.
    pub fn chip_power(&self) -> f64 {
        self.total_power / self.x.len() as f64
    }
}

/// Maps bit 0 to `+a` and bit 1 to `-a` with `a = sqrt(P / (N - 1))`, then
/// appends a zero.
pub fn scale_and_pad(bits: &[u8], total_power: f64, n: usize) -> Result<MlsSequence> {
    if bits.len() + 1 != n {
        return Err(Error::LengthMismatch {
            expected: n.saturating_sub(1),
            actual: bits.len(),
        });
    }
    if total_power.is_nan() || total_power <= 0.0 {
        return Err(Error::InvalidParams("MLS power must be positive".into()));
    }
    let a = (total_power / (n - 1) as f64).sqrt();
    let x: Vec<f64> = bits.iter().map(|&b| if b == 0 { a } else { -a }).collect();
    let mut x_tilde = x.clone();
    x_tilde.push(0.0);
    Ok(MlsSequence {
        x,
        x_tilde,
        total_power,
    })
}
