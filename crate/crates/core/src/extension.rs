//! Half-space extensions `u(x, t) = (K_t * f)(x)`, their derivative tensors, weighted
//! seminorms over `t`, and the ratio experiments built on them.

use rayon::prelude::*;
use serde::Serialize;

use crate::besov::{besov_seminorm_with, BesovOptions, BesovParams};
use crate::error::{invalid, Error, Result};
use crate::fit::{fit_loglog, LinearFit};
use crate::grid::{lp_sum, GridFunction, GridSpec};
use crate::kernels::{gauss_values, kernel_multiplier, poisson_hessian_unit, KernelDerivative, KernelKind};
use crate::quadrature::TQuadrature;
use crate::spectral::{convolve, forward_transform, MultiIndex, SpectralFunction};

/// A function on `R^n x (0, inf)` sampled slice by slice in `t`.
pub trait HalfSpaceField: Sync {
    fn spec(&self) -> &GridSpec;

    /// `d^beta_x d^l_t` of the field at height `t`.
    fn derivative(&self, alpha: &MultiIndex, t: f64) -> Result<GridFunction>;

    fn value(&self, t: f64) -> Result<GridFunction> {
        self.derivative(&MultiIndex::zero(), t)
    }
}

/// `u = K_t * f` with the spectrum of `f` computed once.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    source: GridFunction,
    hat: SpectralFunction,
    kind: KernelKind,
}

impl ExtensionField {
    pub fn new(source: &GridFunction, kind: KernelKind) -> Self {
        Self {
            hat: forward_transform(source),
            source: source.clone(),
            kind,
        }
    }

    pub fn source(&self) -> &GridFunction {
        &self.source
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }
}

impl HalfSpaceField for ExtensionField {
    fn spec(&self) -> &GridSpec {
        self.source.spec()
    }

    fn derivative(&self, alpha: &MultiIndex, t: f64) -> Result<GridFunction> {
        if !alpha.fits(self.spec().dim()) {
            return Err(invalid("multi-index does not fit the grid dimension"));
        }
        let kd = KernelDerivative::new(self.kind, *alpha, t)?;
        Ok(kernel_multiplier(&kd).apply(&self.hat)?.inverse())
    }
}

pub fn extend(f: &GridFunction, kind: KernelKind, t: f64) -> Result<GridFunction> {
    ExtensionField::new(f, kind).value(t)
}

pub fn extension_derivative(f: &GridFunction, kind: KernelKind, alpha: &MultiIndex, t: f64) -> Result<GridFunction> {
    ExtensionField::new(f, kind).derivative(alpha, t)
}

/// Pointwise `|grad^order u|`: every ordered tuple of the `n + 1` directions counted,
/// so each `(beta, l)` enters with its multinomial multiplicity. Order 0 gives `|u|`.
pub fn gradient_tensor_norm<F: HalfSpaceField + ?Sized>(field: &F, order: usize, t: f64) -> Result<GridFunction> {
    if order > MultiIndex::MAX_ORDER {
        return Err(Error::OrderCap(order));
    }
    let spec = *field.spec();
    let mut acc = vec![0.0; spec.len()];
    for (alpha, mult) in MultiIndex::of_order(spec.dim(), order) {
        let d = field.derivative(&alpha, t)?;
        for (a, v) in acc.iter_mut().zip(d.values()) {
            *a += mult * v * v;
        }
    }
    GridFunction::new(spec, acc.into_iter().map(f64::sqrt).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightParams {
    pub m: usize,
    pub a: f64,
    pub p: f64,
}

impl WeightParams {
    pub fn new(m: usize, a: f64, p: f64) -> Result<Self> {
        if m + 1 > MultiIndex::MAX_ORDER {
            return Err(Error::OrderCap(m + 1));
        }
        if !(a > -1.0) || !a.is_finite() {
            return Err(invalid(format!("weight exponent a = {a} violates a > -1")));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(invalid(format!("p = {p} must lie in [1, inf)")));
        }
        Ok(Self { m, a, p })
    }
}

/// `int t^a ||G(t)||_p^p dt` split into the quadrature over `[t_min, t_max]` and the
/// two analytic end pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedReport {
    /// `(interior + head + tail)^(1/p)`.
    pub value: f64,
    pub interior: f64,
    pub head_bound: f64,
    pub tail_bound: f64,
    pub cells: usize,
}

/// Weighted integral of `t -> ||integrand(t)||_p^p`.
pub fn weighted_integral<G>(tq: &TQuadrature, p: f64, integrand: G) -> Result<WeightedReport>
where
    G: Fn(f64) -> Result<f64> + Sync,
{
    let nodes = tq.nodes();
    let weights = tq.weights();
    let g: Vec<f64> = nodes.par_iter().map(|&t| integrand(t)).collect::<Result<_>>()?;
    let interior: f64 = g.iter().zip(&weights).map(|(v, w)| v * w).sum();
    let a = tq.a;
    let head_c = [tq.t_min / 4.0, tq.t_min / 2.0, tq.t_min]
        .iter()
        .map(|&t| integrand(t))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let head = head_c * tq.t_min.powf(a + 1.0) / (a + 1.0);
    let k = g.len();
    let tail = if g[k - 1] == 0.0 {
        0.0
    } else {
        let rate = (g[k - 2] / g[k - 1]).ln() / (nodes[k - 1] - nodes[k - 2]);
        let slack = a.max(0.0) / tq.t_max;
        if !(rate > slack) || !rate.is_finite() {
            return Err(Error::Resolution(format!(
                "integrand does not decay at t_max = {}",
                tq.t_max
            )));
        }
        let at_end = g[k - 1] * (-rate * (tq.t_max - nodes[k - 1])).exp();
        at_end * tq.t_max.powf(a) / (rate - slack)
    };
    if interior > 0.0 && (head > 0.01 * interior || tail > 0.01 * interior) {
        return Err(Error::Resolution(format!(
            "end corrections too large: head {head:.3e}, tail {tail:.3e}, interior {interior:.3e}"
        )));
    }
    if interior == 0.0 && (head > 0.0 || tail > 0.0) {
        return Err(Error::Resolution("integrand lives outside [t_min, t_max]".into()));
    }
    Ok(WeightedReport {
        value: (interior + head + tail).powf(1.0 / p),
        interior,
        head_bound: head,
        tail_bound: tail,
        cells: tq.cells(),
    })
}

fn check_weight(wp: &WeightParams, tq: &TQuadrature) -> Result<()> {
    if (wp.a - tq.a).abs() > 1e-15 {
        return Err(invalid("t-quadrature weight differs from the seminorm weight"));
    }
    Ok(())
}

/// `(int t^a |grad^(m+1) u|^p dx dt)^(1/p)`.
pub fn weighted_seminorm<F: HalfSpaceField + ?Sized>(
    field: &F,
    wp: &WeightParams,
    tq: &TQuadrature,
) -> Result<WeightedReport> {
    check_weight(wp, tq)?;
    weighted_order_norm(field, wp.m + 1, wp.p, tq)
}

/// `(int t^a |grad^order u|^p dx dt)^(1/p)` with the weight taken from `tq`.
pub fn weighted_order_norm<F: HalfSpaceField + ?Sized>(
    field: &F,
    order: usize,
    p: f64,
    tq: &TQuadrature,
) -> Result<WeightedReport> {
    let cell = field.spec().cell_volume();
    weighted_integral(tq, p, |t| {
        let g = gradient_tensor_norm(field, order, t)?;
        Ok(lp_sum(g.values(), p, cell))
    })
}

/// `int t^a ||d^alpha u||_1 dt` for a single tensor entry.
pub fn weighted_component<F: HalfSpaceField + ?Sized>(
    field: &F,
    alpha: &MultiIndex,
    tq: &TQuadrature,
) -> Result<WeightedReport> {
    weighted_integral(tq, 1.0, |t| Ok(field.derivative(alpha, t)?.l1_norm()))
}

/// `||K_t * f - f||_1` along `ts`.
pub fn trace_limit(f: &GridFunction, kind: KernelKind, ts: &[f64]) -> Result<Vec<f64>> {
    let field = ExtensionField::new(f, kind);
    ts.iter().map(|&t| Ok(field.value(t)?.sub(f)?.l1_norm())).collect()
}

/// Log-log rate of [`trace_limit`] errors.
pub fn trace_rate(f: &GridFunction, kind: KernelKind, ts: &[f64]) -> Result<(Vec<f64>, LinearFit)> {
    let errs = trace_limit(f, kind, ts)?;
    let fit = fit_loglog(ts, &errs)?;
    Ok((errs, fit))
}

/// One LHS/RHS comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub experiment: String,
    pub function_id: String,
    pub m: usize,
    pub a: f64,
    pub p: f64,
    pub kind: KernelKind,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` when the right side vanishes.
    pub ratio: Option<f64>,
    pub tail_bound: f64,
    pub head_bound: f64,
    pub boundary_tail: f64,
}

impl RatioRow {
    pub fn flagged(&self) -> bool {
        self.ratio.is_none()
    }
}

/// Rows of one experiment plus the stability measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    /// Largest defined ratio: the empirical constant.
    pub constant: f64,
    /// Relative ratio changes under dilation, one per (function, lambda).
    pub dilation_deltas: Vec<f64>,
    /// Relative ratio changes under `N -> 2N`.
    pub refinement_deltas: Vec<f64>,
}

impl RatioReport {
    pub fn from_rows(rows: Vec<RatioRow>) -> Self {
        let constant = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
        Self {
            rows,
            constant,
            ..Default::default()
        }
    }
}

fn ratio_of(lhs: f64, rhs: f64) -> Option<f64> {
    if rhs > 0.0 {
        Some(lhs / rhs)
    } else {
        None
    }
}

/// Options shared by the Besov right-hand sides of the ratio experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioOptions {
    /// Include the `|h| > L/2` estimate in the Besov side.
    pub far_field: bool,
    /// Include the small-step correction in the Besov side (n = 1).
    pub near_field: bool,
    /// Head scale `tau` of [`TQuadrature::with_head_scale`].
    pub head_scale: f64,
    /// Upper end of the quadrature; `None` means `2L`.
    pub t_max: Option<f64>,
    pub rho: f64,
}

impl Default for RatioOptions {
    fn default() -> Self {
        Self {
            far_field: true,
            near_field: true,
            head_scale: 1e-4,
            t_max: None,
            rho: 1.05,
        }
    }
}

fn ratio_quadrature(a: f64, spec: &GridSpec, opts: &RatioOptions) -> Result<TQuadrature> {
    let tq = TQuadrature::with_head_scale(a, opts.head_scale, spec.length(), opts.rho)?;
    match opts.t_max {
        Some(t_max) => TQuadrature::new(a, tq.t_min, t_max, opts.rho),
        None => Ok(tq),
    }
}

/// `int t^a |grad^(m+1) u| dx dt` against `|f|_{B^{m-a,1}_1}`.
pub fn main_estimate_ratio(
    id: &str,
    f: &GridFunction,
    m: usize,
    a: f64,
    kind: KernelKind,
    opts: &RatioOptions,
) -> Result<RatioRow> {
    if !(a > -1.0 && a < m as f64) {
        return Err(Error::Hypothesis(format!("need -1 < a < m, got a = {a}, m = {m}")));
    }
    let mut row = p_estimate_ratio(id, f, &WeightParams::new(m, a, 1.0)?, kind, opts)?;
    row.experiment = "main_estimate".into();
    Ok(row)
}

/// `int t^a |grad^(m+1) u|^p dx dt` against `|f|^p_{B^{s,p}_p}` with
/// `s = m + 1 - (a + 1)/p`.
pub fn p_estimate_ratio(
    id: &str,
    f: &GridFunction,
    wp: &WeightParams,
    kind: KernelKind,
    opts: &RatioOptions,
) -> Result<RatioRow> {
    let s = wp.m as f64 + 1.0 - (wp.a + 1.0) / wp.p;
    if !(s > 0.0) {
        return Err(Error::Hypothesis(format!(
            "need a < p(m+1) - 1, got a = {}, m = {}, p = {}",
            wp.a, wp.m, wp.p
        )));
    }
    let spec = *f.spec();
    let tq = ratio_quadrature(wp.a, &spec, opts)?;
    let field = ExtensionField::new(f, kind);
    let w = weighted_seminorm(&field, wp, &tq)?;
    let bp = BesovParams::new(s, wp.p, wp.p)?;
    let b = besov_seminorm_with(
        f,
        &bp,
        &BesovOptions {
            floor: None,
            far_field: opts.far_field,
            near_field: opts.near_field,
        },
    )?;
    let lhs = w.value.powf(wp.p);
    let rhs = b.value.powf(wp.p);
    Ok(RatioRow {
        experiment: "p_estimate".into(),
        function_id: id.into(),
        m: wp.m,
        a: wp.a,
        p: wp.p,
        kind,
        lhs,
        rhs,
        ratio: ratio_of(lhs, rhs),
        tail_bound: w.tail_bound,
        head_bound: w.head_bound,
        boundary_tail: f.boundary_tail(),
    })
}

/// `int int |d^2 u / dx_i dt|` against `max_j int int |d^2 u / dx_i dx_j|` for the
/// harmonic extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossTerm {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
}

pub fn cross_term_check(f: &GridFunction, i: usize) -> Result<CrossTerm> {
    let spec = *f.spec();
    let n = spec.dim();
    if i >= n {
        return Err(invalid(format!("direction {i} outside dimension {n}")));
    }
    let tq = TQuadrature::with_head_scale(0.0, 1e-4, spec.length(), 1.05)?;
    let field = ExtensionField::new(f, KernelKind::Poisson);
    let mut bi = [0, 0];
    bi[i] = 1;
    let lhs = weighted_component(&field, &MultiIndex::new(bi, 1)?, &tq)?.value;
    let mut rhs: f64 = 0.0;
    for j in 0..n {
        let mut b = bi;
        b[j] += 1;
        rhs = rhs.max(weighted_component(&field, &MultiIndex::space(b)?, &tq)?.value);
    }
    Ok(CrossTerm {
        lhs,
        rhs,
        ratio: ratio_of(lhs, rhs),
    })
}

/// Residual of `d^2 u/dx_i dx_j = 1/2 int K(h) [f(x+h) + f(x-h) - 2 f(x)] dh` with the
/// sampled kernel `K = d^2 K_t/dx_i dx_j`; the lattice sum over `h` is evaluated as a
/// circular convolution. Normalized by the sup of the left side.
pub fn uspenskii_ansatz_residual(f: &GridFunction, kind: KernelKind, i: usize, j: usize, t: f64) -> Result<f64> {
    let spec = *f.spec();
    let n = spec.dim();
    if i >= n || j >= n {
        return Err(invalid("direction outside the grid dimension"));
    }
    let mut beta = [0, 0];
    beta[i] += 1;
    beta[j] += 1;
    let alpha = MultiIndex::space(beta)?;
    let kernel = match kind {
        KernelKind::GaussWeierstrass => gauss_values(&alpha, t, &spec)?,
        KernelKind::Poisson => poisson_hessian_values(i, j, t, &spec)?,
    };
    let lhs = extension_derivative(f, kind, &alpha, t)?;
    // even kernel: the f(x+h) and f(x-h) sums coincide
    let mass = kernel.integral();
    let rhs = convolve(&kernel, f)?.sub(&f.scale(mass))?;
    let scale = lhs.sup_norm();
    if scale == 0.0 {
        return Ok(rhs.sup_norm());
    }
    Ok(lhs.sub(&rhs)?.sup_norm() / scale)
}

/// `t^(-n-2) d^2 P_1/dx_i dx_j (h / t)` summed over periodic images. The periodized
/// kernel is a derivative of a periodic function, so its mean is zero; removing the
/// mean of the truncated sum accounts for the constant part of the omitted images.
pub fn poisson_hessian_values(i: usize, j: usize, t: f64, spec: &GridSpec) -> Result<GridFunction> {
    if !(t > 0.0) {
        return Err(invalid("t must be positive"));
    }
    let n = spec.dim();
    let l = spec.length();
    let images: i64 = if n == 1 { 200 } else { 16 };
    let jy = if n == 2 { images } else { 0 };
    let scale = t.powi(-(n as i32) - 2);
    let values = (0..spec.len())
        .map(|idx| {
            let x = spec.point(idx);
            let mut s = 0.0;
            for a in -images..=images {
                for b in -jy..=jy {
                    let y = [(x[0] + a as f64 * l) / t, (x[1] + b as f64 * l) / t];
                    s += poisson_hessian_unit(n, i, j, y);
                }
            }
            s * scale
        })
        .collect();
    let sum = GridFunction::new(*spec, values)?;
    let mean = sum.mean();
    Ok(sum.map(|v| v - mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cosine(n: usize, size: usize, l: f64) -> GridFunction {
        let spec = GridSpec::new(n, size, l).unwrap();
        GridFunction::from_fn(spec, |x| (2.0 * PI * x[0] / l).cos()).unwrap()
    }

    #[test]
    fn extend_examples() {
        let spec = GridSpec::new(1, 64, 16.0).unwrap();
        let c = GridFunction::constant(spec, 2.5);
        let u = extend(&c, KernelKind::GaussWeierstrass, 3.0).unwrap();
        assert!(u.sub(&c).unwrap().sup_norm() < 1e-13);
        let f = cosine(1, 64, 16.0);
        let t = 1.7;
        let g = extend(&f, KernelKind::GaussWeierstrass, t).unwrap();
        let p = extend(&f, KernelKind::Poisson, t).unwrap();
        let gs = (-4.0 * PI * PI * t * t / 256.0).exp();
        let ps = (-2.0 * PI * t / 16.0).exp();
        assert!(g.sub(&f.scale(gs)).unwrap().sup_norm() < 1e-14);
        assert!(p.sub(&f.scale(ps)).unwrap().sup_norm() < 1e-14);
        assert!(extend(&f, KernelKind::Poisson, 0.0).is_err());
    }

    #[test]
    fn heat_and_laplace_equations() {
        let spec = GridSpec::new(1, 256, 16.0).unwrap();
        let f = GridFunction::from_fn(spec, |x| (-x[0] * x[0]).exp() * (1.0 + x[0])).unwrap();
        let t = 0.8;
        let ut = extension_derivative(&f, KernelKind::GaussWeierstrass, &MultiIndex::time(1).unwrap(), t).unwrap();
        let uxx =
            extension_derivative(&f, KernelKind::GaussWeierstrass, &MultiIndex::space([2, 0]).unwrap(), t).unwrap();
        assert!(ut.sub(&uxx.scale(2.0 * t)).unwrap().sup_norm() <= 1e-8);
        let ptt = extension_derivative(&f, KernelKind::Poisson, &MultiIndex::time(2).unwrap(), t).unwrap();
        let pxx = extension_derivative(&f, KernelKind::Poisson, &MultiIndex::space([2, 0]).unwrap(), t).unwrap();
        assert!(ptt.add(&pxx).unwrap().sup_norm() <= 1e-8);
    }

    #[test]
    fn tensor_norm_definitions() {
        let f = cosine(1, 64, 16.0);
        let field = ExtensionField::new(&f, KernelKind::GaussWeierstrass);
        let t = 0.9;
        let g1 = gradient_tensor_norm(&field, 1, t).unwrap();
        let ux = field.derivative(&MultiIndex::space([1, 0]).unwrap(), t).unwrap();
        let ut = field.derivative(&MultiIndex::time(1).unwrap(), t).unwrap();
        for i in 0..64 {
            let e = (ux.values()[i].powi(2) + ut.values()[i].powi(2)).sqrt();
            assert!((g1.values()[i] - e).abs() < 1e-15);
        }
        let g2 = gradient_tensor_norm(&field, 2, t).unwrap();
        let uxt = field.derivative(&MultiIndex::new([1, 0], 1).unwrap(), t).unwrap();
        for i in 0..64 {
            assert!(g2.values()[i] >= uxt.values()[i].abs() * 2f64.sqrt() - 1e-15);
        }
        let c = GridFunction::constant(*f.spec(), 1.0);
        let g0 = gradient_tensor_norm(&ExtensionField::new(&c, KernelKind::Poisson), 1, t).unwrap();
        assert!(g0.sup_norm() < 1e-15);
    }

    #[test]
    fn weighted_seminorm_single_mode_oracle() {
        // independent quadrature of int int sqrt(u_x^2 + u_t^2) for cos(2 pi x / 16)
        let f = cosine(1, 64, 16.0);
        let field = ExtensionField::new(&f, KernelKind::GaussWeierstrass);
        let wp = WeightParams::new(0, 0.0, 1.0).unwrap();
        let tq = TQuadrature::default_for(0.0, 16.0).unwrap();
        let r = weighted_seminorm(&field, &wp, &tq).unwrap();
        assert!((r.value - 15.640838806762906).abs() < 5e-3 * 15.64, "{}", r.value);
        let fine = TQuadrature::new(0.0, tq.t_min, tq.t_max, 1.05f64.powf(0.25)).unwrap();
        let rf = weighted_seminorm(&field, &wp, &fine).unwrap();
        assert!((r.value - rf.value).abs() < 5e-3 * rf.value);
        let zero = ExtensionField::new(&f.scale(0.0), KernelKind::GaussWeierstrass);
        assert_eq!(weighted_seminorm(&zero, &wp, &tq).unwrap().value, 0.0);
    }

    #[test]
    fn parameter_checks() {
        assert!(WeightParams::new(0, -1.0, 1.0).is_err());
        assert!(WeightParams::new(4, 0.0, 1.0).is_err());
        let f = cosine(1, 64, 16.0);
        let o = RatioOptions::default();
        assert!(matches!(
            main_estimate_ratio("f", &f, 1, 1.0, KernelKind::GaussWeierstrass, &o),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn cross_term_single_mode() {
        let f = cosine(1, 256, 16.0);
        let c = cross_term_check(&f, 0).unwrap();
        assert!((c.ratio.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn uspenskii_residuals() {
        let spec = GridSpec::new(1, 512, 16.0).unwrap();
        let f = GridFunction::from_fn(spec, |x| (-x[0] * x[0]).exp() * (2.0 * x[0]).cos()).unwrap();
        assert!(uspenskii_ansatz_residual(&f, KernelKind::GaussWeierstrass, 0, 0, 1.0).unwrap() <= 1e-6);
        assert!(uspenskii_ansatz_residual(&f, KernelKind::Poisson, 0, 0, 1.0).unwrap() <= 1e-5);
    }

    #[test]
    fn trace_limit_rates() {
        let f = cosine(1, 64, 16.0);
        let ts: Vec<f64> = (4..=10).map(|k| 2f64.powi(-k)).collect();
        let (_, g) = trace_rate(&f, KernelKind::GaussWeierstrass, &ts).unwrap();
        let (_, p) = trace_rate(&f, KernelKind::Poisson, &ts).unwrap();
        assert!((g.slope - 2.0).abs() < 0.1);
        assert!((p.slope - 1.0).abs() < 0.1);
        let c = GridFunction::constant(*f.spec(), 4.0);
        assert!(trace_limit(&c, KernelKind::Poisson, &ts)
            .unwrap()
            .iter()
            .all(|&e| e < 1e-12));
    }
}
