//! Adaptive Gauss-Kronrod integration and the geometric t-grids used for
//! weighted half-space integrals.

use serde::Serialize;

use crate::error::{invalid, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7-K15 panel: (Kronrod estimate, |Kronrod - Gauss|).
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive bisection until the summed error estimate falls below
/// `max(abs_tol, rel_tol |value|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0 };
    }
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    for _ in 0..4000 {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            break;
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    QuadResult {
        value: panels.iter().map(|p| p.2).sum(),
        error: panels.iter().map(|p| p.3).sum(),
    }
}

/// Geometric nodes `t_k = t_min rho^k` on `[t_min, t_max]` with exact `t^a` cell weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TQuadrature {
    pub a: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub rho: f64,
    edges: Vec<f64>,
}

impl TQuadrature {
    pub fn new(a: f64, t_min: f64, t_max: f64, rho: f64) -> Result<Self> {
        if !(a > -1.0) {
            return Err(invalid(format!("weight exponent a = {a} must satisfy a > -1")));
        }
        if !(t_min > 0.0) || !(t_max > t_min) {
            return Err(invalid(format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
        }
        if !(rho > 1.0) || !rho.is_finite() {
            return Err(invalid(format!("geometric ratio rho = {rho} must exceed 1")));
        }
        let mut edges = vec![t_min];
        let mut t = t_min;
        while t * rho < t_max * (1.0 - 1e-12) {
            t *= rho;
            edges.push(t);
        }
        edges.push(t_max);
        Ok(Self {
            a,
            t_min,
            t_max,
            rho,
            edges,
        })
    }

    /// Library default for weight `a` on a torus of length `length`.
    ///
    /// The lower cutoff shrinks for negative `a` so the `(0, t_min)` head stays
    /// small: `t_min = min(1e-3, 1e-3^(1/(a+1)))`.
    pub fn default_for(a: f64, length: f64) -> Result<Self> {
        Self::with_head_scale(a, 1e-3, length, 1.05)
    }

    /// `t_min = tau^(1/(a+1))` for `a < 0` and `tau` otherwise, so the head piece
    /// `t_min^(a+1)` is at most `tau`.
    pub fn with_head_scale(a: f64, tau: f64, length: f64, rho: f64) -> Result<Self> {
        let t_min = if a < 0.0 {
            tau.powf(1.0 / (a + 1.0)).min(tau)
        } else {
            tau
        };
        Self::new(a, t_min, 2.0 * length, rho)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    /// Geometric midpoints of the cells.
    pub fn nodes(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect()
    }

    /// `int_cell t^a dt`, exact.
    pub fn weights(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| power_integral(self.a, w[0], w[1]))
            .collect()
    }

    /// Same cells with a different weight exponent.
    pub fn with_weight(&self, a: f64) -> Result<Self> {
        Self::new(a, self.t_min, self.t_max, self.rho)
    }

    pub fn coarsened(&self) -> Result<Self> {
        Self::new(self.a, self.t_min, self.t_max, self.rho * self.rho)
    }
}

/// `int_lo^hi t^a dt` for `a > -1`.
pub fn power_integral(a: f64, lo: f64, hi: f64) -> f64 {
    (hi.powf(a + 1.0) - lo.powf(a + 1.0)) / (a + 1.0)
}
