//! Periodic sample grids on the torus `[-L/2, L/2)^n`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    n: usize,
    size: usize,
    length: f64,
}

impl GridSpec {
    pub fn new(n: usize, size: usize, length: f64) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::InvalidGrid(format!("dimension {n} not in {{1, 2}}")));
        }
        if size < 8 || !size.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "N = {size} must be a power of two and at least 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("L = {length} must be positive")));
        }
        Ok(Self { n, size, length })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Samples per axis.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn step(&self) -> f64 {
        self.length / self.size as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.step().powi(self.n as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.n as i32)
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same torus, twice the samples per axis.
    pub fn refined(&self) -> Self {
        Self {
            size: self.size * 2,
            ..*self
        }
    }

    pub fn with_size(&self, size: usize) -> Result<Self> {
        Self::new(self.n, size, self.length)
    }

    /// Signed node offset: `i` for `i < N/2`, otherwise `i - N`.
    pub fn signed_index(&self, i: usize) -> i64 {
        let half = self.size / 2;
        if i < half {
            i as i64
        } else {
            i as i64 - self.size as i64
        }
    }

    /// Centered coordinate of node `i` along one axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        self.signed_index(i) as f64 * self.step()
    }

    /// Integer frequency of FFT slot `i`; the Nyquist slot maps to `-N/2`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        self.signed_index(i)
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.size / 2
    }

    pub fn unravel(&self, idx: usize) -> [usize; 2] {
        if self.n == 1 {
            [idx, 0]
        } else {
            [idx / self.size, idx % self.size]
        }
    }

    pub fn ravel(&self, i: [usize; 2]) -> usize {
        if self.n == 1 {
            i[0]
        } else {
            i[0] * self.size + i[1]
        }
    }

    /// Centered coordinates of node `idx`; the unused second slot is 0 when `n = 1`.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let i = self.unravel(idx);
        let x0 = self.coordinate(i[0]);
        let x1 = if self.n == 2 { self.coordinate(i[1]) } else { 0.0 };
        [x0, x1]
    }

    /// Frequency vector `xi = k / L` of spectral slot `idx`.
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        let i = self.unravel(idx);
        let l = self.length;
        let k0 = self.wavenumber(i[0]) as f64 / l;
        let k1 = if self.n == 2 {
            self.wavenumber(i[1]) as f64 / l
        } else {
            0.0
        };
        [k0, k1]
    }

    /// Index of the node reached from `idx` by the lattice offset `shift`.
    pub fn shifted(&self, idx: usize, shift: [i64; 2]) -> usize {
        let i = self.unravel(idx);
        let nn = self.size as i64;
        let a = (i[0] as i64 + shift[0]).rem_euclid(nn) as usize;
        if self.n == 1 {
            a
        } else {
            let b = (i[1] as i64 + shift[1]).rem_euclid(nn) as usize;
            a * self.size + b
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                spec.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid samples".into()));
        }
        Ok(Self { spec, values })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_raw(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Self { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::from_raw(spec, vec![0.0; spec.len()])
    }

    pub fn constant(spec: GridSpec, c: f64) -> Self {
        Self::from_raw(spec, vec![c; spec.len()])
    }

    /// Samples `f` at the centered node coordinates.
    pub fn from_fn(spec: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..spec.len()).map(|i| f(spec.point(i))).collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_raw(self.spec, values))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn mean_zero(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(sum |f|^p cellvol)^(1/p)`; `p = inf` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
        }
        if p.is_infinite() {
            return Ok(self.sup_norm());
        }
        Ok(lp_sum(&self.values, p, self.spec.cell_volume()).powf(1.0 / p))
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.spec.cell_volume()
    }

    /// Largest |f| on nodes with some centered coordinate of magnitude at least `0.45 L`.
    pub fn boundary_tail(&self) -> f64 {
        let edge = 0.45 * self.spec.length();
        let mut tail: f64 = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            let x = self.spec.point(idx);
            let far = x[0].abs() >= edge || (self.spec.dim() == 2 && x[1].abs() >= edge);
            if far {
                tail = tail.max(v.abs());
            }
        }
        tail
    }
}

/// `sum |v|^p * w` without the root.
pub(crate) fn lp_sum(values: &[f64], p: f64, w: f64) -> f64 {
    let s: f64 = if p == 1.0 {
        values.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    };
    s * w
}
