use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gray-mapped square QAM with unit average symbol energy.
///
/// Each symbol carries `log2(order)` bits, the first half selecting the
/// in-phase level and the second half the quadrature level. Bit values are
/// `0` or `1`.
#[derive(Debug, Clone)]
pub struct Constellation {
    order: u32,
    bits_per_axis: u32,
    levels: u32,
    scale: f64,
}

impl Constellation {
    pub fn new(order: u32) -> Result<Self> {
        let bits_per_axis = match order {
            4 => 1,
            16 => 2,
            64 => 3,
            _ => return Err(Error::UnsupportedQamOrder(order)),
        };
        Ok(Self {
            order,
            bits_per_axis,
            levels: 1 << bits_per_axis,
            scale: (2.0 * (order as f64 - 1.0) / 3.0).sqrt().recip(),
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis as usize
    }

    fn level(&self, bits: &[u8]) -> f64 {
        let gray = bits
            .iter()
            .fold(0u32, |acc, &b| (acc << 1) | (b & 1) as u32);
        let mut index = gray;
        let mut shift = gray >> 1;
        while shift != 0 {
            index ^= shift;
            shift >>= 1;
        }
        (self.levels as f64 - 1.0) - 2.0 * index as f64
    }

    fn unlevel(&self, x: f64, out: &mut Vec<u8>) {
        let top = (self.levels - 1) as f64;
        let index = ((top - x / self.scale) / 2.0).round().clamp(0.0, top) as u32;
        let gray = index ^ (index >> 1);
        for b in (0..self.bits_per_axis).rev() {
            out.push(((gray >> b) & 1) as u8);
        }
    }

    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let k = self.bits_per_symbol();
        if !bits.len().is_multiple_of(k) {
            return Err(Error::LengthMismatch {
                expected: bits.len().div_ceil(k) * k,
                actual: bits.len(),
            });
        }
        let half = self.bits_per_axis as usize;
        Ok(bits
            .chunks(k)
            .map(|c| Complex64::new(self.level(&c[..half]), self.level(&c[half..])) * self.scale)
            .collect())
    }

    /// Hard decision to the nearest constellation point.
    pub fn slice(&self, z: Complex64) -> Complex64 {
        let mut bits = Vec::with_capacity(self.bits_per_symbol());
        self.unlevel(z.re, &mut bits);
        self.unlevel(z.im, &mut bits);
        self.map(&bits).expect("whole symbol")[0]
    }

    pub fn demap(&self, symbols: &[Complex64]) -> Vec<u8> {
        let mut out = Vec::with_capacity(symbols.len() * self.bits_per_symbol());
        for z in symbols {
            self.unlevel(z.re, &mut out);
            self.unlevel(z.im, &mut out);
        }
        out
    }

    pub fn points(&self) -> Vec<Complex64> {
        let k = self.bits_per_symbol();
        (0..self.order)
            .map(|v| {
                let bits: Vec<u8> = (0..k).rev().map(|b| ((v >> b) & 1) as u8).collect();
                self.map(&bits).expect("whole symbol")[0]
            })
            .collect()
    }
}

pub fn qam_modulate(bits: &[u8], order: u32) -> Result<Vec<Complex64>> {
    Constellation::new(order)?.map(bits)
}

pub fn qam_demodulate(symbols: &[Complex64], order: u32) -> Result<Vec<u8>> {
    Ok(Constellation::new(order)?.demap(symbols))
}
