//! Gauss-Weierstrass and Poisson kernels: grid samples, Fourier multipliers,
//! and the time integrals behind the heat-kernel estimates.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::quadrature::integrate;
use crate::spectral::{convolve, derivative_symbol, forward_transform, MultiIndex, Nyquist, SpectralFunction};
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum KernelKind {
    GaussWeierstrass,
    Poisson,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::GaussWeierstrass => "gauss",
            KernelKind::Poisson => "poisson",
        })
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss" | "gaussian" | "heat" => Ok(KernelKind::GaussWeierstrass),
            "poisson" => Ok(KernelKind::Poisson),
            other => Err(invalid(format!("unknown kernel kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDerivative {
    pub kind: KernelKind,
    pub alpha: MultiIndex,
    pub t: f64,
}

impl KernelDerivative {
    pub fn new(kind: KernelKind, alpha: MultiIndex, t: f64) -> Result<Self> {
        check_t(t)?;
        if alpha.order() > MultiIndex::MAX_ORDER {
            return Err(Error::OrderCap(alpha.order()));
        }
        Ok(Self { kind, alpha, t })
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("t = {t} must be positive")));
    }
    Ok(())
}

/// `c_n = Gamma((n+1)/2) / pi^((n+1)/2)` for `n` in {1, 2}.
pub fn poisson_constant(n: usize) -> f64 {
    match n {
        1 => 1.0 / PI,
        _ => 0.5 * PI.sqrt() / PI.powf(1.5),
    }
}

/// Fourier multiplier of `d^beta_x d^l_t` applied to the kernel at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multiplier {
    pub kind: KernelKind,
    pub beta: [usize; 2],
    pub l: usize,
    pub t: f64,
}

pub fn kernel_multiplier(kd: &KernelDerivative) -> Multiplier {
    Multiplier {
        kind: kd.kind,
        beta: kd.alpha.beta,
        l: kd.alpha.l,
        t: kd.t,
    }
}

impl Multiplier {
    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let time = match self.kind {
            KernelKind::GaussWeierstrass => gauss_time_factor(r2, self.t, self.l),
            KernelKind::Poisson => {
                let r = r2.sqrt();
                (-2.0 * PI * r).powi(self.l as i32) * (-2.0 * PI * self.t * r).exp()
            }
        };
        derivative_symbol(self.beta, xi) * time
    }

    pub fn nyquist(&self) -> Nyquist {
        Nyquist::for_derivative(self.beta)
    }

    /// Applies the multiplier to a spectrum.
    pub fn apply(&self, hat: &SpectralFunction) -> Result<SpectralFunction> {
        hat.apply_symbol(|xi| self.eval(xi), self.nyquist())
    }
}

/// `d^l/dt^l exp(-s t^2)` with `s = 4 pi^2 |xi|^2`, via `q_{l+1} = q_l' - 2 s t q_l`.
fn gauss_time_factor(r2: f64, t: f64, l: usize) -> f64 {
    let s = 4.0 * PI * PI * r2;
    let base = (-s * t * t).exp();
    if l == 0 {
        return base;
    }
    // q as coefficients of powers of t
    let mut q = vec![1.0];
    for _ in 0..l {
        let mut next = vec![0.0; q.len() + 1];
        for (i, &c) in q.iter().enumerate() {
            if i > 0 {
                next[i - 1] += c * i as f64;
            }
            next[i + 1] -= 2.0 * s * c;
        }
        q = next;
    }
    let qt = q.iter().rev().fold(0.0, |acc, &c| acc * t + c);
    qt * base
}

/// Polynomial in `(x_1, x_2, t)` with integer (possibly negative) powers of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPoly {
    n: usize,
    terms: BTreeMap<(u32, u32, i32), f64>,
}

impl GaussPoly {
    fn one(n: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0, 0), 1.0);
        Self { n, terms }
    }

    fn push(map: &mut BTreeMap<(u32, u32, i32), f64>, key: (u32, u32, i32), c: f64) {
        if c != 0.0 {
            *map.entry(key).or_insert(0.0) += c;
        }
    }

    /// `d/dx_i (P W_t) = (dP/dx_i - x_i P / (2 t^2)) W_t`.
    fn dx(&self, axis: usize) -> Self {
        let mut out = BTreeMap::new();
        for (&(a, b, e), &c) in &self.terms {
            let (p, key_down, key_up) = if axis == 0 {
                (a, (a.wrapping_sub(1), b, e), (a + 1, b, e - 2))
            } else {
                (b, (a, b.wrapping_sub(1), e), (a, b + 1, e - 2))
            };
            if p > 0 {
                Self::push(&mut out, key_down, c * p as f64);
            }
            Self::push(&mut out, key_up, -0.5 * c);
        }
        Self { n: self.n, terms: out }
    }

    /// `d/dt (P W_t) = (dP/dt + P (-n/t + |x|^2 / (2 t^3))) W_t`.
    fn dt(&self) -> Self {
        let mut out = BTreeMap::new();
        for (&(a, b, e), &c) in &self.terms {
            Self::push(&mut out, (a, b, e - 1), c * (e as f64 - self.n as f64));
            Self::push(&mut out, (a + 2, b, e - 3), 0.5 * c);
            if self.n == 2 {
                Self::push(&mut out, (a, b + 2, e - 3), 0.5 * c);
            }
        }
        Self { n: self.n, terms: out }
    }

    pub fn for_derivative(n: usize, alpha: &MultiIndex) -> Self {
        let mut p = Self::one(n);
        for _ in 0..alpha.l {
            p = p.dt();
        }
        for axis in 0..n {
            for _ in 0..alpha.beta[axis] {
                p = p.dx(axis);
            }
        }
        p
    }

    pub fn eval(&self, x: [f64; 2], t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b, e), &c)| c * x[0].powi(a as i32) * x[1].powi(b as i32) * t.powi(e))
            .sum()
    }
}

fn gauss_profile(n: usize, x: [f64; 2], t: f64) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    (-r2 / (4.0 * t * t)).exp() / (4.0 * PI * t * t).powf(n as f64 / 2.0)
}

/// `d^beta_x d^l_t W_t(x)` on all of R^n.
pub fn gauss_derivative_at(n: usize, alpha: &MultiIndex, t: f64, x: [f64; 2]) -> f64 {
    GaussPoly::for_derivative(n, alpha).eval(x, t) * gauss_profile(n, x, t)
}

fn image_range(t: f64, length: f64) -> i64 {
    1 + (12.0 * t / length).ceil() as i64
}

/// Analytic samples of a Gaussian derivative summed over periodic images.
pub fn gauss_values(alpha: &MultiIndex, t: f64, spec: &GridSpec) -> Result<GridFunction> {
    check_t(t)?;
    let n = spec.dim();
    let poly = GaussPoly::for_derivative(n, alpha);
    let l = spec.length();
    let j = image_range(t, l);
    let jy = if n == 2 { j } else { 0 };
    let values = (0..spec.len())
        .map(|idx| {
            let x = spec.point(idx);
            let mut s = 0.0;
            for a in -j..=j {
                for b in -jy..=jy {
                    let y = [x[0] + a as f64 * l, x[1] + b as f64 * l];
                    s += poly.eval(y, t) * gauss_profile(n, y, t);
                }
            }
            s
        })
        .collect();
    GridFunction::new(*spec, values)
}

/// Periodized Poisson kernel. Exact in `n = 1`; in `n = 2` an image sum plus the
/// continuum mass of the images outside the summed block, with the midpoint-rule
/// correction for that continuum.
pub fn poisson_values(t: f64, spec: &GridSpec) -> Result<GridFunction> {
    check_t(t)?;
    let l = spec.length();
    let values: Vec<f64> = if spec.dim() == 1 {
        let a = 2.0 * PI * t / l;
        let th = a.tanh();
        let ch = a.cosh();
        (0..spec.len())
            .map(|idx| {
                let x = spec.point(idx)[0];
                th / (1.0 - (2.0 * PI * x / l).cos() / ch) / l
            })
            .collect()
    } else {
        let c2 = poisson_constant(2);
        let j: i64 = 16;
        let half = (j as f64 + 0.5) * l;
        (0..spec.len())
            .map(|idx| {
                let x = spec.point(idx);
                let mut s = 0.0;
                for a in -j..=j {
                    for b in -j..=j {
                        let y0 = x[0] + a as f64 * l;
                        let y1 = x[1] + b as f64 * l;
                        s += c2 * t / (y0 * y0 + y1 * y1 + t * t).powf(1.5);
                    }
                }
                let inside = rectangle_mass(t, [x[0] - half, x[0] + half], [x[1] - half, x[1] + half]);
                let flux = box_flux(t, [x[0] - half, x[0] + half], [x[1] - half, x[1] + half]);
                s + (1.0 - inside) / (l * l) + flux / 24.0
            })
            .collect()
    };
    GridFunction::new(*spec, values)
}

/// Mass of the two-dimensional Poisson kernel over a rectangle (solid-angle formula).
fn rectangle_mass(t: f64, xr: [f64; 2], yr: [f64; 2]) -> f64 {
    let g = |x: f64, y: f64| (x * y / (t * (x * x + y * y + t * t).sqrt())).atan() / (2.0 * PI);
    g(xr[1], yr[1]) - g(xr[0], yr[1]) - g(xr[1], yr[0]) + g(xr[0], yr[0])
}

/// Outward flux of the gradient of the two-dimensional Poisson kernel through a rectangle.
fn box_flux(t: f64, xr: [f64; 2], yr: [f64; 2]) -> f64 {
    let c = poisson_constant(2);
    // d/dX of int P(X, y) dy
    let dh = |xf: f64, y: f64| {
        let q = xf * xf + t * t;
        let r = q + y * y;
        c * t * y * (-2.0 * xf / (q * q * r.sqrt()) - xf / (q * r.powf(1.5)))
    };
    (dh(xr[1], yr[1]) - dh(xr[1], yr[0])) - (dh(xr[0], yr[1]) - dh(xr[0], yr[0]))
        + (dh(yr[1], xr[1]) - dh(yr[1], xr[0]))
        - (dh(yr[0], xr[1]) - dh(yr[0], xr[0]))
}

/// Analytic second space derivative `d^2 P_1 / dx_i dx_j` at `y`.
pub fn poisson_hessian_unit(n: usize, i: usize, j: usize, y: [f64; 2]) -> f64 {
    let c = poisson_constant(n);
    let rho = y[0] * y[0] + y[1] * y[1] + 1.0;
    let nn = n as f64;
    let delta = if i == j { 1.0 } else { 0.0 };
    -(nn + 1.0) * c * (delta * rho.powf(-(nn + 3.0) / 2.0) - (nn + 3.0) * y[i] * y[j] * rho.powf(-(nn + 5.0) / 2.0))
}

/// Samples of the kernel derivative.
///
/// Gaussian derivatives are analytic; Poisson samples are analytic for the bare
/// kernel and spectral for derivatives.
pub fn kernel_values(kd: &KernelDerivative, spec: &GridSpec) -> Result<GridFunction> {
    if !kd.alpha.fits(spec.dim()) {
        return Err(invalid("multi-index does not fit the grid dimension"));
    }
    let raw = match kd.kind {
        KernelKind::GaussWeierstrass => gauss_values(&kd.alpha, kd.t, spec)?,
        KernelKind::Poisson if kd.alpha.order() == 0 => poisson_values(kd.t, spec)?,
        KernelKind::Poisson => kernel_values_spectral(kd, spec)?,
    };
    Ok(reflect_parity(&raw, (kd.alpha.beta[0] + kd.alpha.beta[1]) % 2 == 1))
}

/// Average with the reflection `x -> -x` so the x-parity holds bit for bit.
fn reflect_parity(g: &GridFunction, odd: bool) -> GridFunction {
    let spec = *g.spec();
    let nn = spec.size();
    let v = g.values();
    let out = (0..spec.len())
        .map(|idx| {
            let i = spec.unravel(idx);
            let mirror = spec.ravel([(nn - i[0]) % nn, (nn - i[1]) % nn]);
            if odd {
                0.5 * (v[idx] - v[mirror])
            } else {
                0.5 * (v[idx] + v[mirror])
            }
        })
        .collect();
    GridFunction::from_raw(spec, out)
}

/// Inverse transform of the multiplier: the periodized kernel up to aliasing.
pub fn kernel_values_spectral(kd: &KernelDerivative, spec: &GridSpec) -> Result<GridFunction> {
    let m = kernel_multiplier(kd);
    Ok(SpectralFunction::from_symbol(*spec, |xi| m.eval(xi), m.nyquist())?.inverse())
}

/// Sup of `dW_t/dt - 2t Laplacian W_t`, analytic left side against spectral right
/// side, relative to sup |dW_t/dt|.
pub fn heat_identity_residual(t: f64, spec: &GridSpec) -> Result<f64> {
    check_t(t)?;
    let lhs = gauss_values(&MultiIndex::time(1)?, t, spec)?;
    let n = spec.dim();
    let rhs = SpectralFunction::from_symbol(
        *spec,
        |xi| {
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            Complex64::new(
                2.0 * t * (-4.0 * PI * PI * r2) * (-4.0 * PI * PI * t * t * r2).exp(),
                0.0,
            )
        },
        Nyquist::Keep,
    )?
    .inverse();
    debug_assert_eq!(rhs.spec().dim(), n);
    Ok(lhs.sub(&rhs)?.sup_norm() / lhs.sup_norm())
}

/// `max_xi |W^_t - W^_{t/sqrt2}^2|` over represented frequencies.
pub fn semigroup_residual(t: f64, spec: &GridSpec) -> Result<f64> {
    check_t(t)?;
    let full = kernel_multiplier(&KernelDerivative::new(
        KernelKind::GaussWeierstrass,
        MultiIndex::zero(),
        t,
    )?);
    let half = kernel_multiplier(&KernelDerivative::new(
        KernelKind::GaussWeierstrass,
        MultiIndex::zero(),
        t / 2f64.sqrt(),
    )?);
    let n = spec.dim();
    let mut worst: f64 = 0.0;
    for idx in 0..spec.len() {
        let xi = spec.frequency(idx);
        let h = half.eval(&xi[..n]);
        worst = worst.max((full.eval(&xi[..n]) - h * h).norm());
    }
    Ok(worst)
}

/// Sup of `d^(a+b) W_t - d^a W_{t/sqrt2} * d^b W_{t/sqrt2}` with analytic samples on
/// both sides and the convolution done spectrally.
pub fn semigroup_split_residual(t: f64, spec: &GridSpec, left: [usize; 2], right: [usize; 2]) -> Result<f64> {
    check_t(t)?;
    let total = MultiIndex::space([left[0] + right[0], left[1] + right[1]])?;
    let s = t / 2f64.sqrt();
    let whole = gauss_values(&total, t, spec)?;
    let a = gauss_values(&MultiIndex::space(left)?, s, spec)?;
    let b = gauss_values(&MultiIndex::space(right)?, s, spec)?;
    Ok(whole.sub(&convolve(&a, &b)?)?.sup_norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatIntegral {
    /// Quadrature value on `(0, T]`.
    pub value: f64,
    /// Analytic bound for the omitted `(T, inf)` piece.
    pub tail_bound: f64,
    pub quadrature_error: f64,
}

/// Sup over R^n of `|d^beta W_1|`, the scale constant of `|d^beta W_t| <= C t^(-n-|beta|)`.
pub fn gauss_sup_constant(n: usize, alpha: &MultiIndex) -> f64 {
    let one_d = |k: usize| {
        let m = MultiIndex { beta: [k, 0], l: 0 };
        let poly = GaussPoly::for_derivative(1, &m);
        (0..=40_000)
            .map(|i| {
                let x = -20.0 + i as f64 * 1e-3;
                (poly.eval([x, 0.0], 1.0) * gauss_profile(1, [x, 0.0], 1.0)).abs()
            })
            .fold(0.0, f64::max)
    };
    (0..n).map(|axis| one_d(alpha.beta[axis])).product()
}

/// `int_0^T t^b |d^alpha W_t(x)| dt` together with a bound for the tail beyond `T`.
pub fn heat_time_integral(n: usize, alpha: &MultiIndex, b: f64, x: [f64; 2], t_end: f64) -> Result<HeatIntegral> {
    if alpha.l != 0 || !alpha.fits(n) {
        return Err(invalid(
            "heat_time_integral takes space derivatives fitting the dimension",
        ));
    }
    let exponent = n as f64 + alpha.order() as f64 - b - 1.0;
    if exponent <= 0.0 {
        return Err(Error::Hypothesis(format!(
            "n + |alpha| - b - 1 = {exponent} must be positive"
        )));
    }
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r == 0.0 {
        return Err(invalid("x must be nonzero"));
    }
    if !(t_end > 0.0) {
        return Err(invalid("T must be positive"));
    }
    let poly = GaussPoly::for_derivative(n, alpha);
    // substitute t = exp(s); the integrand is negligible below t = r / 100
    let g = |s: f64| {
        let t = s.exp();
        t.powf(b + 1.0) * (poly.eval(x, t) * gauss_profile(n, x, t)).abs()
    };
    let lo = (r * 1e-2).ln();
    let mid = r.ln();
    let hi = t_end.ln();
    let mut pieces = Vec::new();
    if hi > mid {
        pieces.push(integrate(g, lo, mid, 1e-13, 0.0));
        pieces.push(integrate(g, mid, hi, 1e-13, 0.0));
    } else if hi > lo {
        pieces.push(integrate(g, lo, hi, 1e-13, 0.0));
    }
    let value: f64 = pieces.iter().map(|p| p.value).sum();
    let quadrature_error: f64 = pieces.iter().map(|p| p.error).sum();
    let c = gauss_sup_constant(n, alpha);
    let tail_bound = c * t_end.powf(-exponent) / exponent;
    Ok(HeatIntegral {
        value,
        tail_bound,
        quadrature_error,
    })
}

/// `||d^k w_t||_{L^1(R)}` for the one-dimensional kernel, split at sign changes.
fn gauss_l1_1d(k: usize, t: f64) -> f64 {
    let m = MultiIndex { beta: [k, 0], l: 0 };
    let poly = GaussPoly::for_derivative(1, &m);
    let f = |x: f64| poly.eval([x, 0.0], t) * gauss_profile(1, [x, 0.0], t);
    let reach = 40.0 * t;
    let mut cuts = vec![-reach];
    let steps = 20_000;
    let h = 2.0 * reach / steps as f64;
    let mut prev = f(-reach);
    for i in 1..=steps {
        let x = -reach + i as f64 * h;
        let cur = f(x);
        if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
            let (mut a, mut b) = (x - h, x);
            for _ in 0..80 {
                let c = 0.5 * (a + b);
                if f(c).signum() == f(a).signum() {
                    a = c;
                } else {
                    b = c;
                }
            }
            cuts.push(0.5 * (a + b));
        }
        prev = cur;
    }
    cuts.push(reach);
    cuts.windows(2)
        .map(|w| integrate(|x| f(x).abs(), w[0], w[1], 1e-14, 0.0).value)
        .sum()
}

/// `||d^alpha W_t||_{L^1(R^n)}`; the kernel factorizes over axes.
pub fn kernel_l1_decay(n: usize, alpha: &MultiIndex, t: f64) -> Result<f64> {
    check_t(t)?;
    if alpha.l != 0 || !alpha.fits(n) {
        return Err(invalid("kernel_l1_decay takes space derivatives fitting the dimension"));
    }
    Ok((0..n).map(|axis| gauss_l1_1d(alpha.beta[axis], t)).product())
}

/// Spectrum of a grid function shifted into the multiplier of a kernel derivative.
pub fn apply_kernel(f: &GridFunction, kd: &KernelDerivative) -> Result<GridFunction> {
    Ok(kernel_multiplier(kd).apply(&forward_transform(f))?.inverse())
}
