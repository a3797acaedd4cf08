//! Fourier transforms on the torus with the continuous normalization
//! `f^(xi) = int f(x) exp(-2 pi i x.xi) dx`, `xi = k / L`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>);

thread_local! {
    static PLANS: RefCell<PlanCache> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((len, forward))
            .or_insert_with(|| {
                if forward {
                    planner.plan_fft_forward(len)
                } else {
                    planner.plan_fft_inverse(len)
                }
            })
            .clone()
    })
}

/// Unnormalized in-place DFT along every axis.
fn fft_nd(data: &mut [Complex64], n: usize, size: usize, forward: bool) {
    let fft = plan(size, forward);
    if n == 1 {
        fft.process(data);
        return;
    }
    fft.process(data);
    let mut column = vec![Complex64::new(0.0, 0.0); size];
    for c in 0..size {
        for r in 0..size {
            column[r] = data[r * size + c];
        }
        fft.process(&mut column);
        for r in 0..size {
            data[r * size + c] = column[r];
        }
    }
}

/// Space orders `beta` and the order `l` in the extension variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub beta: [usize; 2],
    pub l: usize,
}

impl MultiIndex {
    pub const MAX_ORDER: usize = 4;

    pub fn new(beta: [usize; 2], l: usize) -> Result<Self> {
        let m = Self { beta, l };
        if m.order() > Self::MAX_ORDER {
            return Err(Error::OrderCap(m.order()));
        }
        Ok(m)
    }

    pub const fn zero() -> Self {
        Self { beta: [0, 0], l: 0 }
    }

    pub fn space(beta: [usize; 2]) -> Result<Self> {
        Self::new(beta, 0)
    }

    pub fn time(l: usize) -> Result<Self> {
        Self::new([0, 0], l)
    }

    pub fn space_order(&self) -> usize {
        self.beta[0] + self.beta[1]
    }

    pub fn order(&self) -> usize {
        self.space_order() + self.l
    }

    pub fn fits(&self, n: usize) -> bool {
        n == 2 || self.beta[1] == 0
    }

    /// All `(beta, l)` with `|beta| + l = order` in dimension `n`, paired with the
    /// multinomial count of ordered direction tuples producing each one.
    pub fn of_order(n: usize, order: usize) -> Vec<(MultiIndex, f64)> {
        let mut out = Vec::new();
        for l in 0..=order {
            let rest = order - l;
            if n == 1 {
                out.push((MultiIndex { beta: [rest, 0], l }, multinomial(&[rest, l])));
            } else {
                for b0 in 0..=rest {
                    let b1 = rest - b0;
                    out.push((MultiIndex { beta: [b0, b1], l }, multinomial(&[b0, b1, l])));
                }
            }
        }
        out
    }

    /// Space-only multi-indices of the given order.
    pub fn spatial_of_order(n: usize, order: usize) -> Vec<MultiIndex> {
        Self::of_order(n, order)
            .into_iter()
            .map(|(m, _)| m)
            .filter(|m| m.l == 0)
            .collect()
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        factorial(n) / (factorial(k) * factorial(n - k))
    }
}

pub(crate) fn multinomial(parts: &[usize]) -> f64 {
    let total: usize = parts.iter().sum();
    parts.iter().fold(factorial(total), |acc, &p| acc / factorial(p))
}

/// Which Nyquist modes an odd symbol must clear to keep real data real.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nyquist {
    Keep,
    ZeroAxes([bool; 2]),
    ZeroShell,
}

impl Nyquist {
    /// Policy for the symbol `(2 pi i xi)^beta`.
    pub fn for_derivative(beta: [usize; 2]) -> Self {
        let odd = [beta[0] % 2 == 1, beta[1] % 2 == 1];
        if odd[0] || odd[1] {
            Nyquist::ZeroAxes(odd)
        } else {
            Nyquist::Keep
        }
    }

    fn clears(&self, spec: &GridSpec, idx: usize) -> bool {
        let i = spec.unravel(idx);
        let nyq = [spec.is_nyquist(i[0]), spec.dim() == 2 && spec.is_nyquist(i[1])];
        match self {
            Nyquist::Keep => false,
            Nyquist::ZeroAxes(axes) => (axes[0] && nyq[0]) || (axes[1] && nyq[1]),
            Nyquist::ZeroShell => nyq[0] || nyq[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    spec: GridSpec,
    coeffs: Vec<Complex64>,
}

pub fn forward_transform(f: &GridFunction) -> SpectralFunction {
    let spec = *f.spec();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, spec.dim(), spec.size(), true);
    let w = spec.cell_volume();
    for c in &mut data {
        *c *= w;
    }
    SpectralFunction { spec, coeffs: data }
}

impl SpectralFunction {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficients sampled directly from a symbol: the transform of the periodized kernel.
    pub fn from_symbol(spec: GridSpec, symbol: impl Fn(&[f64]) -> Complex64, nyquist: Nyquist) -> Result<Self> {
        let ones = Self {
            spec,
            coeffs: vec![Complex64::new(1.0, 0.0); spec.len()],
        };
        ones.apply_symbol(symbol, nyquist)
    }

    /// Coefficient at integer frequency `k` (each component in `[-N/2, N/2)`).
    pub fn coeff(&self, k: [i64; 2]) -> Complex64 {
        let nn = self.spec.size() as i64;
        let a = k[0].rem_euclid(nn) as usize;
        let idx = if self.spec.dim() == 1 {
            a
        } else {
            a * self.spec.size() + k[1].rem_euclid(nn) as usize
        };
        self.coeffs[idx]
    }

    pub fn inverse(&self) -> GridFunction {
        let mut data = self.coeffs.clone();
        fft_nd(&mut data, self.spec.dim(), self.spec.size(), false);
        let w = 1.0 / self.spec.volume();
        GridFunction::from_raw(self.spec, data.iter().map(|c| c.re * w).collect())
    }

    /// `coeffs(k) <- mult(k / L) coeffs(k)`.
    pub fn apply_multiplier(&self, mult: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        self.apply_symbol(mult, Nyquist::Keep)
    }

    pub fn apply_symbol(&self, mult: impl Fn(&[f64]) -> Complex64, nyquist: Nyquist) -> Result<Self> {
        let n = self.spec.dim();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (idx, c) in self.coeffs.iter().enumerate() {
            if nyquist.clears(&self.spec, idx) {
                coeffs.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let xi = self.spec.frequency(idx);
            let m = mult(&xi[..n]);
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(Error::NonFinite(format!("multiplier at xi = {:?}", &xi[..n])));
            }
            coeffs.push(m * c);
        }
        Ok(Self {
            spec: self.spec,
            coeffs,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self {
            spec: self.spec,
            coeffs,
        })
    }

    /// Product of transforms: the transform of the convolution.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).collect();
        Ok(Self {
            spec: self.spec,
            coeffs,
        })
    }

    /// `L^{-n} sum |c_k|^2`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.spec.volume()
    }
}

/// `(2 pi i xi)^beta`.
pub fn derivative_symbol(beta: [usize; 2], xi: &[f64]) -> Complex64 {
    let mut m = Complex64::new(1.0, 0.0);
    for (axis, &b) in beta.iter().enumerate() {
        if b == 0 {
            continue;
        }
        let w = Complex64::new(0.0, 2.0 * PI * xi.get(axis).copied().unwrap_or(0.0));
        m *= w.powu(b as u32);
    }
    m
}

pub fn partial_derivative(f: &GridFunction, alpha: &MultiIndex) -> Result<GridFunction> {
    if alpha.order() > MultiIndex::MAX_ORDER {
        return Err(Error::OrderCap(alpha.order()));
    }
    if alpha.l != 0 {
        return Err(Error::InvalidParameter(
            "partial_derivative takes space orders only".into(),
        ));
    }
    if !alpha.fits(f.spec().dim()) {
        return Err(Error::InvalidParameter(format!(
            "multi-index {:?} does not fit dimension {}",
            alpha.beta,
            f.spec().dim()
        )));
    }
    if alpha.order() == 0 {
        return Ok(f.clone());
    }
    let beta = alpha.beta;
    let hat = forward_transform(f);
    Ok(hat
        .apply_symbol(|xi| derivative_symbol(beta, xi), Nyquist::for_derivative(beta))?
        .inverse())
}

/// `(f * g)(x) = int f(y) g(x - y) dy` on the torus.
pub fn convolve(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    if f.spec() != g.spec() {
        return Err(Error::GridMismatch);
    }
    Ok(forward_transform(f).product(&forward_transform(g))?.inverse())
}

/// `x -> f(lambda x)` for `lambda = 2^j`.
///
/// `lambda > 1` remaps indices on the torus, so the result is the periodic dilation.
/// `lambda < 1` evaluates the trigonometric interpolant at `lambda x`, which
/// reproduces the dilation of a function supported in `|x| < lambda L / 2`.
pub fn dilate(f: &GridFunction, lambda: f64) -> Result<GridFunction> {
    let spec = *f.spec();
    let j = lambda.log2().round();
    if !(lambda > 0.0) || (2f64.powf(j) - lambda).abs() > 1e-12 * lambda {
        return Err(Error::InvalidParameter(format!(
            "dilation factor {lambda} is not a power of two"
        )));
    }
    let j = j as i32;
    if j == 0 {
        return Ok(f.clone());
    }
    if j > 0 {
        let factor = 1usize << j;
        if factor >= spec.size() {
            return Err(Error::InvalidParameter(format!(
                "dilation factor {lambda} exceeds the grid resolution"
            )));
        }
        let vals = f.values();
        let out = (0..spec.len())
            .map(|idx| {
                let i = spec.unravel(idx);
                let src = [(i[0] * factor) % spec.size(), (i[1] * factor) % spec.size()];
                vals[spec.ravel(src)]
            })
            .collect();
        return Ok(GridFunction::from_raw(spec, out));
    }
    let factor = 1usize << (-j);
    if factor > 64 {
        return Err(Error::InvalidParameter(format!(
            "dilation factor {lambda} below the supported range"
        )));
    }
    // Zero-pad the spectrum by `factor` so the fine grid holds the interpolant
    // at every point lambda * x_i.
    let fine = GridSpec::new(spec.dim(), spec.size() * factor, spec.length())?;
    let hat = forward_transform(f);
    let nn = spec.size() as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); fine.len()];
    for idx in 0..spec.len() {
        let i = spec.unravel(idx);
        let k = [spec.wavenumber(i[0]), spec.wavenumber(i[1])];
        let c = hat.coeffs[idx];
        // Nyquist energy is split evenly between +N/2 and -N/2 on the fine grid.
        let mut targets = vec![(k, 1.0)];
        for axis in 0..spec.dim() {
            if k[axis] == -nn / 2 {
                let mut next = Vec::new();
                for (kk, w) in targets {
                    let mut flipped = kk;
                    flipped[axis] = nn / 2;
                    next.push((kk, w * 0.5));
                    next.push((flipped, w * 0.5));
                }
                targets = next;
            }
        }
        for (kk, w) in targets {
            let fi = fine.ravel([
                kk[0].rem_euclid(fine.size() as i64) as usize,
                kk[1].rem_euclid(fine.size() as i64) as usize,
            ]);
            coeffs[fi] += c * w;
        }
    }
    let interp = SpectralFunction { spec: fine, coeffs }.inverse();
    let fv = interp.values();
    let fsize = fine.size() as i64;
    let out = (0..spec.len())
        .map(|idx| {
            let i = spec.unravel(idx);
            // lambda * x_i lands on fine node signed_index(i) (fine step = lambda * step).
            let a = spec.signed_index(i[0]).rem_euclid(fsize) as usize;
            let b = spec.signed_index(i[1]).rem_euclid(fsize) as usize;
            fv[fine.ravel([a, b])]
        })
        .collect();
    Ok(GridFunction::from_raw(spec, out))
}
