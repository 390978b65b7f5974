use std::ops::{Deref, DerefMut, Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major `M x N` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    m: usize,
    n: usize,
    data: Vec<Complex64>,
}

impl Grid {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            data: vec![Complex64::new(0.0, 0.0); m * n],
        }
    }

    pub fn from_vec(m: usize, n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::LengthMismatch {
                expected: m * n,
                actual: data.len(),
            });
        }
        Ok(Self { m, n, data })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, l: usize) -> &[Complex64] {
        &self.data[l * self.n..(l + 1) * self.n]
    }

    pub fn row_mut(&mut self, l: usize) -> &mut [Complex64] {
        &mut self.data[l * self.n..(l + 1) * self.n]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, Complex64> {
        self.data.chunks(self.n)
    }

    pub fn rows_mut(&mut self) -> std::slice::ChunksMut<'_, Complex64> {
        self.data.chunks_mut(self.n)
    }

    /// Row-major vectorization, `vec[l * N + k] = X[l, k]`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Grid) -> f64 {
        assert_eq!((self.m, self.n), (other.m, other.n));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Grid {
    type Output = Complex64;

    fn index(&self, (l, k): (usize, usize)) -> &Complex64 {
        &self.data[l * self.n + k]
    }
}

impl IndexMut<(usize, usize)> for Grid {
    fn index_mut(&mut self, (l, k): (usize, usize)) -> &mut Complex64 {
        &mut self.data[l * self.n + k]
    }
}

macro_rules! grid_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(pub Grid);

        impl $name {
            pub fn zeros(m: usize, n: usize) -> Self {
                Self(Grid::zeros(m, n))
            }

            pub fn from_vec(m: usize, n: usize, data: Vec<Complex64>) -> Result<Self> {
                Grid::from_vec(m, n, data).map(Self)
            }

            pub fn into_inner(self) -> Grid {
                self.0
            }
        }

        impl Deref for $name {
            type Target = Grid;

            fn deref(&self) -> &Grid {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut Grid {
                &mut self.0
            }
        }
    };
}

grid_newtype!(
    /// Delay-Doppler grid `X_DD[l, k]`.
    DdGrid
);
grid_newtype!(
    /// Delay-time grid `X_DT[l, n]`.
    DtGrid
);

/// Serial complex baseband samples.
///
/// `start` is the time index `n'` of `samples[0]` relative to the first
/// sample after the cyclic prefix of the frame of interest. A bare serialized
/// frame starts at 0; adding a prefix of length `L` moves it to `-L`. The
/// channel model uses this index for its Doppler phase.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub samples: Vec<Complex64>,
    pub start: i64,
}

impl TimeSeries {
    pub fn new(samples: Vec<Complex64>) -> Self {
        Self { samples, start: 0 }
    }

    pub fn with_start(samples: Vec<Complex64>, start: i64) -> Self {
        Self { samples, start }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Buffer index of time index `t`, if it lies inside the buffer.
    pub fn index_of(&self, t: i64) -> Option<usize> {
        let i = t - self.start;
        (i >= 0 && (i as usize) < self.samples.len()).then_some(i as usize)
    }

    /// `len` samples starting at buffer index `from`, zero-filled where the
    /// range leaves the buffer.
    pub fn window(&self, from: i64, len: usize) -> Vec<Complex64> {
        (0..len as i64)
            .map(|i| {
                let j = from + i;
                if j >= 0 && (j as usize) < self.samples.len() {
                    self.samples[j as usize]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}
