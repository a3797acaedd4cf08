//! Finite differences, lattice Besov and Zygmund seminorms, and the two
//! divergence counterexamples.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fit::{fit_line, LinearFit};
use crate::grid::{GridFunction, GridSpec};
use crate::jet::{smooth_step, Jet};
use crate::spectral::{binomial, partial_derivative, MultiIndex};

/// `Delta_h^order` with `h` given in grid steps per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DifferenceSpec {
    pub h: [i64; 2],
    pub order: usize,
}

impl DifferenceSpec {
    pub fn new(h: [i64; 2], order: usize) -> Result<Self> {
        if h == [0, 0] {
            return Err(invalid("difference step h must be nonzero"));
        }
        if order == 0 || order > MultiIndex::MAX_ORDER {
            return Err(invalid(format!("difference order {order} not in 1..=4")));
        }
        Ok(Self { h, order })
    }

    fn check(&self, spec: &GridSpec) -> Result<()> {
        if spec.dim() == 1 && self.h[1] != 0 {
            return Err(invalid("two-component step on a one-dimensional grid"));
        }
        Ok(())
    }

    pub fn length(&self, spec: &GridSpec) -> f64 {
        lattice_length(self.h, spec)
    }
}

fn lattice_length(h: [i64; 2], spec: &GridSpec) -> f64 {
    ((h[0] * h[0] + h[1] * h[1]) as f64).sqrt() * spec.step()
}

/// Iterated periodic shift-and-subtract.
pub fn difference(f: &GridFunction, d: &DifferenceSpec) -> Result<GridFunction> {
    d.check(f.spec())?;
    let spec = *f.spec();
    let mut cur = f.values().to_vec();
    for _ in 0..d.order {
        cur = (0..spec.len()).map(|i| cur[spec.shifted(i, d.h)] - cur[i]).collect();
    }
    Ok(GridFunction::from_raw(spec, cur))
}

/// `sum_i (-1)^(k-i) C(k, i) f(x + i h)`.
pub fn difference_binomial(f: &GridFunction, d: &DifferenceSpec) -> Result<GridFunction> {
    d.check(f.spec())?;
    let spec = *f.spec();
    let coef = difference_coefficients(d.order);
    let v = f.values();
    let out = (0..spec.len())
        .map(|i| {
            let mut s = 0.0;
            for (m, c) in coef.iter().enumerate() {
                s += c * v[spec.shifted(i, [d.h[0] * m as i64, d.h[1] * m as i64])];
            }
            s
        })
        .collect();
    Ok(GridFunction::from_raw(spec, out))
}

fn difference_coefficients(k: usize) -> Vec<f64> {
    (0..=k)
        .map(|i| {
            let sign = if (k - i).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(k, i)
        })
        .collect()
}

/// `sum_x |Delta_h^k f(x)|^p` without the cell volume; the maximum when `p = inf`.
fn difference_power_sum(v: &[f64], spec: &GridSpec, h: [i64; 2], coef: &[f64], p: f64) -> f64 {
    let size = spec.size();
    let mask = size - 1;
    let wrap = |base: usize, off: i64| (base as i64 + off).rem_euclid(size as i64) as usize & mask;
    let accumulate = |acc: f64, d: f64| {
        if p.is_infinite() {
            acc.max(d.abs())
        } else if p == 1.0 {
            acc + d.abs()
        } else if p == 2.0 {
            acc + d * d
        } else {
            acc + d.abs().powf(p)
        }
    };
    let mut acc = 0.0;
    if spec.dim() == 1 {
        let offs: Vec<usize> = (0..coef.len()).map(|m| wrap(0, h[0] * m as i64)).collect();
        for x in 0..size {
            let mut s = 0.0;
            for (c, o) in coef.iter().zip(&offs) {
                s += c * v[(x + o) & mask];
            }
            acc = accumulate(acc, s);
        }
    } else {
        let col_offs: Vec<usize> = (0..coef.len()).map(|m| wrap(0, h[1] * m as i64)).collect();
        let mut rows = vec![0usize; coef.len()];
        for r in 0..size {
            for (m, row) in rows.iter_mut().enumerate() {
                *row = wrap(r, h[0] * m as i64) * size;
            }
            for c0 in 0..size {
                let mut s = 0.0;
                for ((c, row), o) in coef.iter().zip(&rows).zip(&col_offs) {
                    s += c * v[row + ((c0 + o) & mask)];
                }
                acc = accumulate(acc, s);
            }
        }
    }
    acc
}

/// Nonzero lattice steps with `|h| <= L/2`, one of each `+-h` pair, ordered by
/// `(|h|^2, h_0, h_1)`.
pub fn lattice_half_set(spec: &GridSpec) -> Vec<[i64; 2]> {
    let half = spec.size() as i64 / 2;
    let r2max = half * half;
    let mut out = Vec::new();
    if spec.dim() == 1 {
        out.extend((1..=half).map(|j| [j, 0]));
    } else {
        for j0 in 0..=half {
            for j1 in -half..=half {
                if (j0 > 0 || j1 > 0) && j0 * j0 + j1 * j1 <= r2max {
                    out.push([j0, j1]);
                }
            }
        }
    }
    out.sort_by_key(|h| (h[0] * h[0] + h[1] * h[1], h[0], h[1]));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(invalid(format!("smoothness s = {s} must be positive")));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(invalid(format!("integrability p = {p} must lie in [1, inf)")));
        }
        if !(q >= 1.0) {
            return Err(invalid(format!("q = {q} must be >= 1")));
        }
        let bp = Self { s, p, q };
        let total = bp.derivative_order() + bp.difference_order();
        if total > MultiIndex::MAX_ORDER {
            return Err(Error::OrderCap(total));
        }
        Ok(bp)
    }

    /// Number of derivatives taken before differencing: 0 for `s <= 1`, else the
    /// largest integer strictly below `s`.
    pub fn derivative_order(&self) -> usize {
        if self.s <= 1.0 {
            0
        } else {
            self.s.ceil() as usize - 1
        }
    }

    /// Smoothness left for the differences, in `(0, 1]`.
    pub fn reduced_smoothness(&self) -> f64 {
        self.s - self.derivative_order() as f64
    }

    pub fn difference_order(&self) -> usize {
        self.reduced_smoothness().floor() as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellContribution {
    pub shell_min: f64,
    pub shell_max: f64,
    pub contribution: f64,
}

/// Lattice seminorm with its shell decomposition. Shell contributions add up to
/// `value^q`; a far-field shell `[L/2, inf)` appears last when requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormReport {
    pub value: f64,
    pub cutoff_low: f64,
    pub cutoff_high: f64,
    pub far_field: f64,
    pub shells: Vec<ShellContribution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BesovOptions {
    /// Drop lattice steps shorter than this.
    pub floor: Option<f64>,
    /// Add the analytic estimate of `|h| > L/2` for data localized well inside the torus:
    /// the translates in `Delta_h^k` no longer overlap there.
    pub far_field: bool,
    /// Add the leading small-step correction `-2 zeta(1 - gamma) c dx^gamma` for the
    /// lattice sum, `c = ||g^(k)||_p^q`, `gamma = (k - sigma) q`. One dimension only.
    pub near_field: bool,
}

struct LatticeTerms {
    q: f64,
    /// `(|h|, contribution to value^q)` for the half set, already doubled.
    terms: Vec<(f64, [i64; 2], f64)>,
    far_field: f64,
    near_field: f64,
}

/// Riemann zeta on `[-2, 1)` by the alternating-series acceleration of the eta function.
pub(crate) fn zeta_below_one(s: f64) -> f64 {
    let n = 40;
    let nf = n as f64;
    // d_k = n sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!)
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0 / nf;
    let mut acc = 0.0;
    for i in 0..=n {
        if i > 0 {
            let fi = i as f64;
            term *= (nf + fi - 1.0) * (nf - fi + 1.0) * 4.0 / ((2.0 * fi - 1.0) * (2.0 * fi));
        }
        acc += term;
        d.push(nf * acc);
    }
    let dn = d[n];
    let mut eta = 0.0;
    for (k, dk) in d.iter().enumerate().take(n) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        eta += sign * (dk - dn) / ((k + 1) as f64).powf(s);
    }
    eta = -eta / dn;
    eta / (1.0 - 2f64.powf(1.0 - s))
}

fn lattice_terms(f: &GridFunction, bp: &BesovParams, far_field: bool, near_field: bool) -> Result<LatticeTerms> {
    if bp.q.is_infinite() {
        return Err(invalid("q = inf is measured by zygmund_seminorm"));
    }
    let spec = *f.spec();
    let n = spec.dim();
    let ell = bp.derivative_order();
    let sigma = bp.reduced_smoothness();
    let k = bp.difference_order();
    let derivs: Vec<GridFunction> = MultiIndex::spatial_of_order(n, ell)
        .iter()
        .map(|a| partial_derivative(f, a))
        .collect::<Result<_>>()?;
    let coef = difference_coefficients(k);
    let cell = spec.cell_volume();
    let (p, q) = (bp.p, bp.q);
    let half = lattice_half_set(&spec);
    let terms: Vec<(f64, [i64; 2], f64)> = half
        .par_iter()
        .map(|&h| {
            let r = lattice_length(h, &spec);
            let mut s = 0.0;
            for g in &derivs {
                let norm = (difference_power_sum(g.values(), &spec, h, &coef, p) * cell).powf(1.0 / p);
                s += norm.powf(q);
            }
            (r, h, 2.0 * s * cell / r.powf(n as f64 + sigma * q))
        })
        .collect();
    let far = if far_field {
        let cp: f64 = coef.iter().map(|c| c.abs().powf(p)).sum::<f64>().powf(q / p);
        let omega = if n == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
        let r = spec.length() / 2.0;
        let mass: f64 = derivs
            .iter()
            .map(|g| g.lp_norm(p).map(|v| v.powf(q)))
            .sum::<Result<f64>>()?;
        cp * mass * omega * r.powf(-sigma * q) / (sigma * q)
    } else {
        0.0
    };
    let near = if near_field {
        if n != 1 {
            return Err(invalid("the near-field correction is implemented for n = 1"));
        }
        let gamma = (k as f64 - sigma) * q;
        let c: f64 = derivs
            .iter()
            .map(|g| {
                partial_derivative(g, &MultiIndex::space([k, 0])?)?
                    .lp_norm(p)
                    .map(|v| v.powf(q))
            })
            .sum::<Result<f64>>()?;
        -2.0 * zeta_below_one(1.0 - gamma) * c * spec.step().powf(gamma)
    } else {
        0.0
    };
    Ok(LatticeTerms {
        q,
        terms,
        far_field: far,
        near_field: near,
    })
}

fn shell_index(h: [i64; 2]) -> u32 {
    // largest j with 4^j <= |h|^2 in grid units
    let m2 = (h[0] * h[0] + h[1] * h[1]) as u64;
    (63 - m2.leading_zeros()) / 2
}

pub fn besov_seminorm(f: &GridFunction, bp: &BesovParams) -> Result<SeminormReport> {
    besov_seminorm_with(f, bp, &BesovOptions::default())
}

pub fn besov_seminorm_with(f: &GridFunction, bp: &BesovParams, opts: &BesovOptions) -> Result<SeminormReport> {
    let spec = *f.spec();
    if let Some(floor) = opts.floor {
        if floor < spec.step() * (1.0 - 1e-12) {
            return Err(Error::Resolution(format!(
                "floor {floor} is below the grid step {}",
                spec.step()
            )));
        }
    }
    let lt = lattice_terms(f, bp, opts.far_field, opts.near_field && opts.floor.is_none())?;
    let floor = opts.floor.unwrap_or(0.0) * (1.0 - 1e-12);
    let dx = spec.step();
    let mut shells: Vec<ShellContribution> = Vec::new();
    let mut low = f64::INFINITY;
    let mut high: f64 = 0.0;
    let mut total = 0.0;
    for &(r, h, c) in &lt.terms {
        if r < floor {
            continue;
        }
        low = low.min(r);
        high = high.max(r);
        total += c;
        let j = shell_index(h);
        let lo = dx * (1u64 << j) as f64;
        match shells.last_mut() {
            Some(last) if last.shell_min == lo => last.contribution += c,
            _ => shells.push(ShellContribution {
                shell_min: lo,
                shell_max: 2.0 * lo,
                contribution: c,
            }),
        }
    }
    if lt.near_field != 0.0 {
        total += lt.near_field;
        shells.insert(
            0,
            ShellContribution {
                shell_min: 0.0,
                shell_max: dx / 2.0,
                contribution: lt.near_field,
            },
        );
    }
    if opts.far_field {
        total += lt.far_field;
        shells.push(ShellContribution {
            shell_min: spec.length() / 2.0,
            shell_max: f64::INFINITY,
            contribution: lt.far_field,
        });
    }
    Ok(SeminormReport {
        value: total.powf(1.0 / lt.q),
        cutoff_low: if lt.near_field != 0.0 {
            0.0
        } else if low.is_finite() {
            low
        } else {
            0.0
        },
        cutoff_high: high,
        far_field: lt.far_field,
        shells,
    })
}

/// `int_0^{L/2} sup_{|h| <= r} ||Delta_h^2 f||_1 dr / r^2`, exact for the step
/// function the lattice produces.
pub fn besov_sup_seminorm_111(f: &GridFunction) -> Result<f64> {
    let spec = *f.spec();
    let coef = difference_coefficients(2);
    let cell = spec.cell_volume();
    let half = lattice_half_set(&spec);
    let norms: Vec<(i64, f64)> = half
        .par_iter()
        .map(|&h| {
            (
                h[0] * h[0] + h[1] * h[1],
                difference_power_sum(f.values(), &spec, h, &coef, 1.0) * cell,
            )
        })
        .collect();
    let mut radii: Vec<(f64, f64)> = Vec::new();
    let mut running: f64 = 0.0;
    for (m2, v) in norms {
        running = running.max(v);
        let r = (m2 as f64).sqrt() * spec.step();
        match radii.last_mut() {
            Some(last) if last.0 == r => last.1 = running,
            _ => radii.push((r, running)),
        }
    }
    let top = spec.length() / 2.0;
    let mut total = 0.0;
    for (i, &(r, m)) in radii.iter().enumerate() {
        let next = radii.get(i + 1).map_or(top, |x| x.0);
        total += m * (1.0 / r - 1.0 / next);
    }
    Ok(total)
}

/// `max_h ||Delta_h^k f||_inf / |h|^s` over the lattice half set.
pub fn zygmund_seminorm(f: &GridFunction, s: f64, k: usize) -> Result<f64> {
    if !(s > 0.0) {
        return Err(invalid(format!("smoothness s = {s} must be positive")));
    }
    if k == 0 || k > MultiIndex::MAX_ORDER {
        return Err(invalid(format!("difference order {k} not in 1..=4")));
    }
    let spec = *f.spec();
    let coef = difference_coefficients(k);
    let half = lattice_half_set(&spec);
    let vals: Vec<f64> = half
        .par_iter()
        .map(|&h| difference_power_sum(f.values(), &spec, h, &coef, f64::INFINITY) / lattice_length(h, &spec).powf(s))
        .collect();
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Sharp samples of the indicator of `[0, 1)^n`.
pub fn indicator_counterexample(spec: &GridSpec) -> Result<GridFunction> {
    if spec.length() <= 2.0 {
        return Err(invalid("the unit cube needs L > 2 to sit inside the torus"));
    }
    let inside = |v: f64| (0.0..1.0).contains(&v);
    GridFunction::from_fn(*spec, |x| {
        if inside(x[0]) && (spec.dim() == 1 || inside(x[1])) {
            1.0
        } else {
            0.0
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceSeries {
    pub floors: Vec<f64>,
    pub values: Vec<f64>,
    /// Fit of value against `ln(1 / floor)`.
    pub fit: LinearFit,
}

/// Truncated seminorms over decreasing floors and their growth in `ln(1/floor)`.
pub fn divergence_study(
    f: &GridFunction,
    bp: &BesovParams,
    floors: &[f64],
    far_field: bool,
) -> Result<DivergenceSeries> {
    let spec = *f.spec();
    if floors.len() < 2 {
        return Err(invalid("divergence study needs at least two floors"));
    }
    if floors.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("floors must be strictly decreasing"));
    }
    if floors.iter().any(|&fl| fl < spec.step() * (1.0 - 1e-12)) {
        return Err(Error::Resolution("floor below the grid step".into()));
    }
    let lt = lattice_terms(f, bp, far_field, false)?;
    let values: Vec<f64> = floors
        .iter()
        .map(|&fl| {
            let cut = fl * (1.0 - 1e-12);
            let s: f64 = lt.terms.iter().filter(|t| t.0 >= cut).map(|t| t.2).sum();
            (s + lt.far_field).powf(1.0 / lt.q)
        })
        .collect();
    let x: Vec<f64> = floors.iter().map(|fl| (1.0 / fl).ln()).collect();
    let fit = fit_line(&x, &values)?;
    Ok(DivergenceSeries {
        floors: floors.to_vec(),
        values,
        fit,
    })
}

/// The one-dimensional bump `phi_1`: 1 on `[0, 1]`, supported in `[-1/2, 3/2]`.
pub fn cube_bump_jet(x: f64) -> Jet {
    let v = Jet::variable(x);
    let a = smooth_step(v.scale(2.0) + Jet::constant(1.0));
    let b = smooth_step(Jet::constant(3.0) - v.scale(2.0));
    a * b
}

fn psi_parts(spec: &GridSpec, k: usize) -> Result<()> {
    if !(2..=3).contains(&k) {
        return Err(invalid(format!("counterexample order k = {k} not in 2..=3")));
    }
    if spec.length() <= 3.0 {
        return Err(invalid("the support [-1/2, 3/2]^n needs L > 3"));
    }
    Ok(())
}

/// Node coordinates along one axis in increasing order, with their storage index.
fn ordered_axis(spec: &GridSpec) -> Vec<(usize, f64)> {
    let size = spec.size();
    (0..size)
        .map(|m| {
            let i = (m + size / 2) % size;
            (i, spec.coordinate(i))
        })
        .collect()
}

/// `J_0 = chi_{s>0} phi_1`, `J_{j+1}(x) = int_{-1}^x J_j`, by cumulative sums.
fn cumulative_profiles(spec: &GridSpec, depth: usize) -> Vec<Vec<f64>> {
    let size = spec.size();
    let dx = spec.step();
    let mut out = vec![vec![0.0; size]];
    for (i, x) in ordered_axis(spec) {
        out[0][i] = if x > 0.0 { cube_bump_jet(x).value() } else { 0.0 };
    }
    for j in 1..=depth {
        let mut next = vec![0.0; size];
        let mut acc = 0.0;
        for (i, x) in ordered_axis(spec) {
            if x > -1.0 {
                acc += out[j - 1][i] * dx;
            }
            next[i] = acc;
        }
        out.push(next);
    }
    out
}

fn tensor_along_last(spec: &GridSpec, last: &[f64], transverse: impl Fn(f64) -> f64) -> GridFunction {
    let values = (0..spec.len())
        .map(|idx| {
            let i = spec.unravel(idx);
            if spec.dim() == 1 {
                last[i[0]]
            } else {
                transverse(spec.coordinate(i[0])) * last[i[1]]
            }
        })
        .collect();
    GridFunction::from_raw(*spec, values)
}

/// `psi = phi(x) int_{-1}^{x_n} ... int_{-1}^{s_{k-2}} chi_{s>0} phi(x', s) ds` with
/// `k - 1` nested integrals along the last axis.
pub fn higher_counterexample_psi(spec: &GridSpec, k: usize) -> Result<GridFunction> {
    psi_parts(spec, k)?;
    let j = cumulative_profiles(spec, k - 1);
    let mut last = vec![0.0; spec.size()];
    for (i, x) in ordered_axis(spec) {
        last[i] = cube_bump_jet(x).value() * j[k - 1][i];
    }
    Ok(tensor_along_last(spec, &last, |y| cube_bump_jet(y).value().powi(2)))
}

/// `d^{k-1} psi / dx_n^{k-1}` by the Leibniz rule on the cumulative profiles.
pub fn higher_counterexample_derivative(spec: &GridSpec, k: usize) -> Result<GridFunction> {
    psi_parts(spec, k)?;
    let j = cumulative_profiles(spec, k - 1);
    let mut last = vec![0.0; spec.size()];
    for (i, x) in ordered_axis(spec) {
        let phi = cube_bump_jet(x);
        last[i] = (0..k)
            .map(|m| binomial(k - 1, m) * phi.derivative(k - 1 - m) * j[k - 1 - m][i])
            .sum();
    }
    Ok(tensor_along_last(spec, &last, |y| cube_bump_jet(y).value().powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingRow {
    pub h: [i64; 2],
    pub length: f64,
    pub lhs: f64,
    /// `|h|^2 ||grad^2 f||_1`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub rows: Vec<EmbeddingRow>,
    pub violations: usize,
    pub max_ratio: f64,
    pub hessian_l1: f64,
    pub l1: f64,
    pub seminorm: f64,
    pub small_h_part: f64,
    pub large_h_part: f64,
    /// `4 ||f||_1` times the lattice sum of `cellvol / |h|^(n+1)` over `1 <= |h| <= L/2`.
    pub large_h_bound: f64,
    /// Same with the continuum integral in place of the lattice sum.
    pub large_h_bound_continuum: f64,
    /// `seminorm / (||grad^2 f||_1 + ||f||_1)`.
    pub constant: f64,
}

/// `||Delta_h^2 f||_1 <= |h|^2 ||grad^2 f||_1` for every lattice step, and the
/// split of the `B^{1,1}` seminorm at `|h| = 1`.
pub fn ftc_embedding_check(f: &GridFunction) -> Result<EmbeddingReport> {
    let spec = *f.spec();
    let n = spec.dim();
    let cell = spec.cell_volume();
    let hess: Vec<GridFunction> = MultiIndex::spatial_of_order(n, 2)
        .iter()
        .map(|a| partial_derivative(f, a))
        .collect::<Result<_>>()?;
    let hessian_l1 = if n == 1 {
        hess[0].l1_norm()
    } else {
        // entries ordered (0,2), (1,1), (2,0); the mixed one appears twice
        let frob: Vec<f64> = (0..spec.len())
            .map(|i| {
                let a = hess[0].values()[i];
                let b = hess[1].values()[i];
                let c = hess[2].values()[i];
                (a * a + 2.0 * b * b + c * c).sqrt()
            })
            .collect();
        frob.iter().sum::<f64>() * cell
    };
    let l1 = f.l1_norm();
    let coef = difference_coefficients(2);
    let half = lattice_half_set(&spec);
    let rows: Vec<EmbeddingRow> = half
        .par_iter()
        .map(|&h| {
            let length = lattice_length(h, &spec);
            EmbeddingRow {
                h,
                length,
                lhs: difference_power_sum(f.values(), &spec, h, &coef, 1.0) * cell,
                rhs: length * length * hessian_l1,
            }
        })
        .collect();
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    let (mut small, mut large, mut lattice_weight) = (0.0, 0.0, 0.0);
    for r in &rows {
        if r.lhs > r.rhs * (1.0 + 1e-12) {
            violations += 1;
        }
        if r.rhs > 0.0 {
            max_ratio = max_ratio.max(r.lhs / r.rhs);
        }
        let w = 2.0 * cell / r.length.powi(n as i32 + 1);
        if r.length < 1.0 {
            small += r.lhs * w;
        } else {
            large += r.lhs * w;
            lattice_weight += w;
        }
    }
    let top = spec.length() / 2.0;
    let continuum = if n == 1 { 2.0 } else { 2.0 * std::f64::consts::PI } * (1.0 - 1.0 / top);
    let seminorm = small + large;
    Ok(EmbeddingReport {
        rows,
        violations,
        max_ratio,
        hessian_l1,
        l1,
        seminorm,
        small_h_part: small,
        large_h_part: large,
        large_h_bound: 4.0 * l1 * lattice_weight,
        large_h_bound_continuum: 4.0 * l1 * continuum,
        constant: if hessian_l1 + l1 > 0.0 {
            seminorm / (hessian_l1 + l1)
        } else {
            0.0
        },
    })
}
