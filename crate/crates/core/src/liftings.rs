//! Inhomogeneous lifts: fields on the half-space built from boundary data with
//! prescribed normal traces, their weighted norms and the decay of their pieces.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::extension::{weighted_integral, weighted_order_norm, ExtensionField, HalfSpaceField};
use crate::fit::fit_loglog;
use crate::grid::{GridFunction, GridSpec};
use crate::jet::{CutoffProfile, Jet};
use crate::kernels::KernelKind;
use crate::quadrature::{integrate, TQuadrature};
use crate::spectral::{
    binomial, derivative_symbol, factorial, forward_transform, MultiIndex, Nyquist, SpectralFunction,
};

pub type SharedField = Arc<dyn HalfSpaceField + Send + Sync>;

/// `(x, t) -> g(x)`.
#[derive(Debug, Clone)]
pub struct StaticField {
    source: GridFunction,
    hat: SpectralFunction,
}

impl StaticField {
    pub fn new(source: &GridFunction) -> Self {
        Self {
            hat: forward_transform(source),
            source: source.clone(),
        }
    }
}

impl HalfSpaceField for StaticField {
    fn spec(&self) -> &GridSpec {
        self.source.spec()
    }

    fn derivative(&self, alpha: &MultiIndex, _t: f64) -> Result<GridFunction> {
        if !alpha.fits(self.spec().dim()) {
            return Err(invalid("multi-index does not fit the grid dimension"));
        }
        if alpha.l > 0 {
            return Ok(GridFunction::zeros(*self.spec()));
        }
        if alpha.space_order() == 0 {
            return Ok(self.source.clone());
        }
        let beta = alpha.beta;
        Ok(self
            .hat
            .apply_symbol(|xi| derivative_symbol(beta, xi), Nyquist::for_derivative(beta))?
            .inverse())
    }
}

/// `c(t) = t^power / power! * profile(l t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeFactor {
    pub power: usize,
    pub profile: Option<(CutoffProfile, f64)>,
}

impl TimeFactor {
    pub fn new(power: usize, profile: Option<(CutoffProfile, f64)>) -> Self {
        Self { power, profile }
    }

    pub fn jet(&self, t: f64) -> Jet {
        let mut j = Jet::constant(1.0 / factorial(self.power));
        for _ in 0..self.power {
            j = j * Jet::variable(t);
        }
        if let Some((p, l)) = self.profile {
            j = j * p.scaled_jet(l, t);
        }
        j
    }

    /// Height beyond which the factor vanishes identically.
    pub fn support_end(&self) -> Option<f64> {
        match self.profile {
            Some((CutoffProfile::Psi, l)) => Some(2.0 / l),
            _ => None,
        }
    }
}

/// `c(t) w(x, t)`, differentiated by the Leibniz rule in `t`.
#[derive(Clone)]
pub struct LiftedField {
    factor: TimeFactor,
    carrier: SharedField,
}

impl LiftedField {
    pub fn new(factor: TimeFactor, carrier: SharedField) -> Self {
        Self { factor, carrier }
    }

    pub fn heat(f: &GridFunction, factor: TimeFactor) -> Self {
        Self::new(factor, Arc::new(ExtensionField::new(f, KernelKind::GaussWeierstrass)))
    }

    pub fn fixed(g: &GridFunction, factor: TimeFactor) -> Self {
        Self::new(factor, Arc::new(StaticField::new(g)))
    }

    pub fn factor(&self) -> &TimeFactor {
        &self.factor
    }
}

impl HalfSpaceField for LiftedField {
    fn spec(&self) -> &GridSpec {
        self.carrier.spec()
    }

    fn derivative(&self, alpha: &MultiIndex, t: f64) -> Result<GridFunction> {
        let c = self.factor.jet(t);
        let mut out: Option<GridFunction> = None;
        for i in 0..=alpha.l {
            let w = binomial(alpha.l, i) * c.derivative(i);
            if w == 0.0 {
                continue;
            }
            let d = self
                .carrier
                .derivative(&MultiIndex::new(alpha.beta, alpha.l - i)?, t)?
                .scale(w);
            out = Some(match out {
                Some(acc) => acc.add(&d)?,
                None => d,
            });
        }
        Ok(out.unwrap_or_else(|| GridFunction::zeros(*self.spec())))
    }
}

/// Sum of fields on one grid.
#[derive(Clone)]
pub struct FieldSum {
    spec: GridSpec,
    parts: Vec<SharedField>,
}

impl FieldSum {
    pub fn new(parts: Vec<SharedField>) -> Result<Self> {
        let spec = *parts
            .first()
            .ok_or_else(|| invalid("a field sum needs at least one part"))?
            .spec();
        if parts.iter().any(|p| *p.spec() != spec) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { spec, parts })
    }
}

impl HalfSpaceField for FieldSum {
    fn spec(&self) -> &GridSpec {
        &self.spec
    }

    fn derivative(&self, alpha: &MultiIndex, t: f64) -> Result<GridFunction> {
        let mut acc = self.parts[0].derivative(alpha, t)?;
        for p in &self.parts[1..] {
            acc = acc.add(&p.derivative(alpha, t)?)?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormComponents {
    /// `int t^a |F| dx dt`.
    pub l1_a: f64,
    /// `|F|_{W_a^{j,1}}` for `j = 1..=m+1`.
    pub seminorms: [f64; 4],
    pub orders: usize,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceCheck {
    pub order: usize,
    pub expected_l1: f64,
    pub error_l1: f64,
    pub relative: f64,
}

/// A constructed field with its declared traces and measured norms.
#[derive(Clone)]
pub struct LiftingResult {
    pub field: SharedField,
    pub m: usize,
    pub a: f64,
    /// `(j, Tr d_t^j F)`.
    pub traces: Vec<(usize, GridFunction)>,
    /// `None` when the full norm diverges (uncut moment lifts of data with mass).
    pub norm: Option<NormComponents>,
    /// `|F|_{W_a^{m+1,1}}`.
    pub top_seminorm: f64,
    pub trace_checks: Vec<TraceCheck>,
    /// Height of the trace measurement.
    pub t_trace: f64,
}

impl LiftingResult {
    pub fn max_trace_error(&self) -> f64 {
        self.trace_checks.iter().map(|c| c.relative).fold(0.0, f64::max)
    }
}

const TRACE_HEIGHT: f64 = 1e-3;

/// Geometric quadrature on `[t_min, t_end]` with `t_min` scaled to the support.
fn lift_quadrature(a: f64, t_end: f64) -> Result<TQuadrature> {
    let base = TRACE_HEIGHT * (t_end / 2.0).min(1.0);
    let t_min = if a < 0.0 {
        base.powf(1.0 / (a + 1.0)).min(base)
    } else {
        base
    };
    TQuadrature::new(a, t_min, t_end, 1.05)
}

fn trace_height(t_end: f64) -> f64 {
    TRACE_HEIGHT * (t_end / 2.0).min(1.0)
}

/// `d_t^order F(t)` by central differences with step `t / 4`.
pub fn normal_derivative_trace<F: HalfSpaceField + ?Sized>(field: &F, order: usize, t: f64) -> Result<GridFunction> {
    let h = t / 4.0;
    let v = |s: f64| field.value(s);
    match order {
        0 => v(t),
        1 => Ok(v(t + h)?.sub(&v(t - h)?)?.scale(0.5 / h)),
        2 => Ok(v(t + h)?.add(&v(t - h)?)?.sub(&v(t)?.scale(2.0))?.scale(1.0 / (h * h))),
        3 => Ok(v(t + 2.0 * h)?
            .sub(&v(t + h)?.scale(2.0))?
            .add(&v(t - h)?.scale(2.0))?
            .sub(&v(t - 2.0 * h)?)?
            .scale(0.5 / (h * h * h))),
        _ => Err(Error::OrderCap(order)),
    }
}

fn check_traces<F: HalfSpaceField + ?Sized>(
    field: &F,
    traces: &[(usize, GridFunction)],
    t: f64,
    reference_l1: f64,
) -> Result<Vec<TraceCheck>> {
    traces
        .iter()
        .map(|(order, expected)| {
            let got = normal_derivative_trace(field, *order, t)?;
            let expected_l1 = expected.l1_norm();
            let error_l1 = got.sub(expected)?.l1_norm();
            let denom = expected_l1.max(reference_l1);
            Ok(TraceCheck {
                order: *order,
                expected_l1,
                error_l1,
                relative: if denom > 0.0 { error_l1 / denom } else { error_l1 },
            })
        })
        .collect()
}

fn norm_components<F: HalfSpaceField + ?Sized>(field: &F, m: usize, tq: &TQuadrature) -> Result<NormComponents> {
    let l1_a = weighted_order_norm(field, 0, 1.0, tq)?.value;
    let mut seminorms = [0.0; 4];
    for j in 1..=m + 1 {
        seminorms[j - 1] = weighted_order_norm(field, j, 1.0, tq)?.value;
    }
    Ok(NormComponents {
        l1_a,
        seminorms,
        orders: m + 1,
        total: l1_a + seminorms.iter().sum::<f64>(),
    })
}

fn check_weight(m: usize, a: f64) -> Result<()> {
    if !(a > -1.0) || !a.is_finite() {
        return Err(invalid(format!("weight exponent a = {a} violates a > -1")));
    }
    if m + 1 > MultiIndex::MAX_ORDER {
        return Err(Error::OrderCap(m + 1));
    }
    Ok(())
}

fn assemble(
    field: SharedField,
    m: usize,
    a: f64,
    traces: Vec<(usize, GridFunction)>,
    t_end: f64,
    full_norm: bool,
) -> Result<LiftingResult> {
    let tq = lift_quadrature(a, t_end)?;
    let norm = if full_norm {
        Some(norm_components(field.as_ref(), m, &tq)?)
    } else {
        None
    };
    let top_seminorm = match &norm {
        Some(n) => n.seminorms[m],
        None => weighted_order_norm(field.as_ref(), m + 1, 1.0, &tq)?.value,
    };
    let t_trace = trace_height(t_end);
    let reference = traces.iter().map(|(_, g)| g.l1_norm()).fold(0.0, f64::max);
    let trace_checks = check_traces(field.as_ref(), &traces, t_trace, reference)?;
    Ok(LiftingResult {
        field,
        m,
        a,
        traces,
        norm,
        top_seminorm,
        trace_checks,
        t_trace,
    })
}

fn psi_heat(f: &GridFunction, power: usize, l: f64) -> LiftedField {
    LiftedField::heat(f, TimeFactor::new(power, Some((CutoffProfile::Psi, l))))
}

/// `F = psi(t) (W_t * f)` with its full weighted norm.
pub fn cutoff_extension(f: &GridFunction, m: usize, a: f64) -> Result<LiftingResult> {
    check_weight(m, a)?;
    if a > m as f64 {
        return Err(Error::Hypothesis(format!("need -1 < a <= m, got a = {a}, m = {m}")));
    }
    cutoff_source(f, m, a)
}

fn cutoff_source(f: &GridFunction, m: usize, a: f64) -> Result<LiftingResult> {
    let field: SharedField = Arc::new(psi_heat(f, 0, 1.0));
    assemble(field, m, a, vec![(0, f.clone())], 2.0, true)
}

/// Separable upper bound of one tensor entry family: `sqrt(mult) ||d^beta f||_1 * int t^a |c^(i)|`.
fn factor_moment(factor: &TimeFactor, i: usize, a: f64, t_end: f64) -> f64 {
    let g = |t: f64| t.powf(a) * factor.jet(t).derivative(i).abs();
    let mid = t_end / 2.0;
    integrate(g, 0.0, mid, 1e-11, 0.0).value + integrate(g, mid, t_end, 1e-11, 0.0).value
}

fn derivative_l1(f: &GridFunction, beta: [usize; 2]) -> Result<f64> {
    Ok(StaticField::new(f)
        .derivative(&MultiIndex::space(beta)?, 0.0)?
        .l1_norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MironescuBuckets {
    pub l: f64,
    /// `beta = 0`: all derivatives on the profile.
    pub beta_zero: f64,
    /// `|beta| >= 1`.
    pub beta_positive: f64,
    /// `|v_l|_{W_m^{m+1,1}}` of the product field itself.
    pub assembled: f64,
}

/// `v_l = f(x) phi(l t)` with weight `a = m`.
pub fn mironescu_lift(f: &GridFunction, m: usize, l: f64) -> Result<(LiftingResult, MironescuBuckets)> {
    check_weight(m, m as f64)?;
    if !(l >= 1.0) {
        return Err(invalid(format!("scale l = {l} must be at least 1")));
    }
    let a = m as f64;
    let factor = TimeFactor::new(0, Some((CutoffProfile::Psi, l)));
    let field: SharedField = Arc::new(LiftedField::fixed(f, factor));
    let t_end = 2.0 / l;
    let res = assemble(field, m, a, vec![(0, f.clone())], t_end, true)?;
    let mut beta_zero = 0.0;
    let mut beta_positive = 0.0;
    for (alpha, mult) in MultiIndex::of_order(f.spec().dim(), m + 1) {
        let c = mult.sqrt() * derivative_l1(f, alpha.beta)? * factor_moment(&factor, alpha.l, a, t_end);
        if alpha.space_order() == 0 {
            beta_zero += c;
        } else {
            beta_positive += c;
        }
    }
    let assembled = res.top_seminorm;
    Ok((
        res,
        MironescuBuckets {
            l,
            beta_zero,
            beta_positive,
            assembled,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalTraceBuckets {
    pub l: f64,
    /// Entry `b` collects the tensor entries with `|beta| = b`.
    pub by_order: Vec<f64>,
    /// `beta = 0` bucket over `||g||_1`.
    pub normalized_zero: f64,
}

/// `v_l = g(x) t^(m-k)/(m-k)! phi(l t)` with weight `a = k`.
pub fn normal_trace_lift(g: &GridFunction, m: usize, k: usize, l: f64) -> Result<(LiftingResult, NormalTraceBuckets)> {
    if k >= m {
        return Err(invalid(format!("need k < m, got k = {k}, m = {m}")));
    }
    check_weight(m, k as f64)?;
    if !(l >= 1.0) {
        return Err(invalid(format!("scale l = {l} must be at least 1")));
    }
    let a = k as f64;
    let factor = TimeFactor::new(m - k, Some((CutoffProfile::Psi, l)));
    let field: SharedField = Arc::new(LiftedField::fixed(g, factor));
    let zero = GridFunction::zeros(*g.spec());
    let mut traces: Vec<(usize, GridFunction)> = (0..m - k).map(|j| (j, zero.clone())).collect();
    traces.push((m - k, g.clone()));
    let t_end = 2.0 / l;
    let res = assemble(field, m, a, traces, t_end, true)?;
    let mut by_order = vec![0.0; m + 2];
    for (alpha, mult) in MultiIndex::of_order(g.spec().dim(), m + 1) {
        by_order[alpha.space_order()] +=
            mult.sqrt() * derivative_l1(g, alpha.beta)? * factor_moment(&factor, alpha.l, a, t_end);
    }
    let g1 = g.l1_norm();
    let normalized_zero = if g1 > 0.0 { by_order[0] / g1 } else { 0.0 };
    Ok((
        res,
        NormalTraceBuckets {
            l,
            by_order,
            normalized_zero,
        },
    ))
}

/// `u_j = t^j / j! (W_t * f_j)`; the full norm is skipped because `t^j` times the
/// mean of `f_j` is not integrable in `t`.
pub fn moment_lift(f: &GridFunction, j: usize, m: usize, a: f64) -> Result<LiftingResult> {
    check_weight(m, a)?;
    if j > m {
        return Err(invalid(format!("moment order j = {j} exceeds m = {m}")));
    }
    let field: SharedField = Arc::new(LiftedField::heat(f, TimeFactor::new(j, None)));
    let zero = GridFunction::zeros(*f.spec());
    let mut traces: Vec<(usize, GridFunction)> = (0..j).map(|i| (i, zero.clone())).collect();
    traces.push((j, f.clone()));
    let t_end = 2.0 * f.spec().length();
    assemble(field, m, a, traces, t_end, false)
}

/// Which data a composite lift consumes for `(m, a)`.
pub fn composite_data_count(m: usize, a: f64) -> Result<usize> {
    check_weight(m, a)?;
    if a > m as f64 {
        return Err(Error::Hypothesis(format!("need a <= m, got a = {a}, m = {m}")));
    }
    if a >= 0.0 && a.fract() == 0.0 {
        Ok(m - a as usize + 1)
    } else {
        Ok((m as f64 - a).floor() as usize + 1)
    }
}

/// Inductive correction: cut-off moment lifts of the corrected data, closed by a
/// normal-trace lift when `a` is an integer.
pub fn composite_lift(data: &[GridFunction], m: usize, a: f64) -> Result<LiftingResult> {
    let count = composite_data_count(m, a)?;
    if data.len() != count {
        return Err(invalid(format!(
            "(m, a) = ({m}, {a}) needs {count} boundary data, got {}",
            data.len()
        )));
    }
    let spec = *data[0].spec();
    if data.iter().any(|d| *d.spec() != spec) {
        return Err(Error::GridMismatch);
    }
    let integer = a >= 0.0 && a.fract() == 0.0;
    let t_trace = trace_height(2.0);
    let mut parts: Vec<SharedField> = Vec::new();
    for (j, f) in data.iter().enumerate() {
        let order = MultiIndex::time(j)?;
        let mut datum = f.clone();
        for p in &parts {
            datum = datum.sub(&p.derivative(&order, t_trace)?)?;
        }
        let last = j + 1 == count;
        let part: SharedField = if integer && last && j > 0 {
            Arc::new(LiftedField::fixed(
                &datum,
                TimeFactor::new(j, Some((CutoffProfile::Psi, 1.0))),
            ))
        } else {
            Arc::new(psi_heat(&datum, j, 1.0))
        };
        parts.push(part);
    }
    let field: SharedField = Arc::new(FieldSum::new(parts)?);
    let traces = data.iter().cloned().enumerate().collect();
    assemble(field, m, a, traces, 2.0, true)
}

/// `sum_j ||f_j||_{B^{m-k-j,1}} + ||f_{m-k}||_1` with `||.||_B = ||.||_1 + |.|_B`.
pub fn composite_data_norm(data: &[GridFunction], m: usize, a: f64) -> Result<f64> {
    use crate::besov::{besov_seminorm_with, BesovOptions, BesovParams};
    let count = composite_data_count(m, a)?;
    if data.len() != count {
        return Err(invalid("data count does not match (m, a)"));
    }
    let integer = a >= 0.0 && a.fract() == 0.0;
    let mut total = 0.0;
    for (j, f) in data.iter().enumerate() {
        total += f.l1_norm();
        let s = m as f64 - a - j as f64;
        if integer && j + 1 == count {
            continue;
        }
        let bp = BesovParams::new(s, 1.0, 1.0)?;
        let opts = BesovOptions {
            floor: None,
            far_field: true,
            near_field: f.spec().dim() == 1,
        };
        total += besov_seminorm_with(f, &bp, &opts)?.value;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrisvardRow {
    pub j: f64,
    /// Entry `i`: the terms with `i` derivatives on `psi(j t)`.
    pub buckets: Vec<f64>,
    /// `|u - v_j|_{W_a^{m+1,1}}`.
    pub distance: f64,
    /// `distance / |u|_{W_a^{m+1,1}}`.
    pub relative: f64,
}

/// The cut-off heat extension used as the approximated field; any `a > -1`.
pub fn grisvard_source(f: &GridFunction, m: usize, a: f64) -> Result<LiftingResult> {
    check_weight(m, a)?;
    if a <= m as f64 {
        return Err(Error::Hypothesis(format!("need a > m, got a = {a}, m = {m}")));
    }
    cutoff_source(f, m, a)
}

/// Distance from `u` to `v_j = u phi(j t)` (`phi` vanishing on `[0, 1]`) in
/// `W_a^{m+1,1}`, with `u - v_j = u psi(j t)`.
pub fn grisvard_approximation(source: &LiftingResult, a: f64, j: f64) -> Result<GrisvardRow> {
    let m = source.m;
    if a <= m as f64 {
        return Err(Error::Hypothesis(format!("need a > m, got a = {a}, m = {m}")));
    }
    if (a - source.a).abs() > 1e-15 {
        return Err(invalid("source was measured with a different weight"));
    }
    if !(j >= 1.0) {
        return Err(invalid(format!("scale j = {j} must be at least 1")));
    }
    let factor = TimeFactor::new(0, Some((CutoffProfile::Psi, j)));
    let diff = LiftedField::new(factor, source.field.clone());
    let t_end = 2.0 / j;
    let tq = TQuadrature::new(a, trace_height(t_end), t_end, 1.02)?;
    let distance = weighted_order_norm(&diff, m + 1, 1.0, &tq)?.value;
    let n = source.field.spec().dim();
    let entries = MultiIndex::of_order(n, m + 1);
    let mut buckets = Vec::with_capacity(m + 2);
    for i in 0..=m + 1 {
        let report = weighted_integral(&tq, 1.0, |t| {
            let c = factor.jet(t).derivative(i).abs();
            if c == 0.0 {
                return Ok(0.0);
            }
            let mut s = 0.0;
            for (alpha, mult) in &entries {
                if alpha.l < i {
                    continue;
                }
                let d = source.field.derivative(&MultiIndex::new(alpha.beta, alpha.l - i)?, t)?;
                s += mult.sqrt() * binomial(alpha.l, i) * d.l1_norm();
            }
            Ok(c * s)
        })?;
        buckets.push(report.value);
    }
    let relative = if source.top_seminorm > 0.0 {
        distance / source.top_seminorm
    } else {
        0.0
    };
    Ok(GrisvardRow {
        j,
        buckets,
        distance,
        relative,
    })
}

/// One decay measurement; rows of a bucket share the fitted log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub construction: String,
    pub param_l_or_j: f64,
    pub bucket: String,
    pub value: f64,
    pub fitted_slope: Option<f64>,
    pub r2: Option<f64>,
}

/// Fills `fitted_slope` and `r2` per `(construction, bucket)` from positive values.
pub fn attach_fits(rows: &mut [DecayRow]) {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in rows.iter() {
        let k = (r.construction.clone(), r.bucket.clone());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    for (c, b) in keys {
        let (x, y): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.construction == c && r.bucket == b)
            .map(|r| (r.param_l_or_j, r.value))
            .unzip();
        let fit = fit_loglog(&x, &y).ok();
        for r in rows.iter_mut().filter(|r| r.construction == c && r.bucket == b) {
            r.fitted_slope = fit.map(|f| f.slope);
            r.r2 = fit.map(|f| f.r2);
        }
    }
}

fn row(construction: &str, param: f64, bucket: String, value: f64) -> DecayRow {
    DecayRow {
        construction: construction.into(),
        param_l_or_j: param,
        bucket,
        value,
        fitted_slope: None,
        r2: None,
    }
}

pub fn mironescu_decay(f: &GridFunction, m: usize, ls: &[f64]) -> Result<Vec<DecayRow>> {
    let mut rows = Vec::new();
    for &l in ls {
        let (_, b) = mironescu_lift(f, m, l)?;
        rows.push(row("mironescu", l, "beta_zero".into(), b.beta_zero));
        rows.push(row("mironescu", l, "beta_positive".into(), b.beta_positive));
        rows.push(row("mironescu", l, "assembled".into(), b.assembled));
    }
    attach_fits(&mut rows);
    Ok(rows)
}

pub fn normal_trace_decay(g: &GridFunction, m: usize, k: usize, ls: &[f64]) -> Result<Vec<DecayRow>> {
    let mut rows = Vec::new();
    for &l in ls {
        let (_, b) = normal_trace_lift(g, m, k, l)?;
        for (order, v) in b.by_order.iter().enumerate() {
            rows.push(row("normal_trace", l, format!("beta_{order}"), *v));
        }
        rows.push(row("normal_trace", l, "normalized_zero".into(), b.normalized_zero));
    }
    attach_fits(&mut rows);
    Ok(rows)
}

pub fn grisvard_decay(f: &GridFunction, m: usize, a: f64, js: &[f64]) -> Result<Vec<DecayRow>> {
    let source = grisvard_source(f, m, a)?;
    let mut rows = Vec::new();
    for &j in js {
        let g = grisvard_approximation(&source, a, j)?;
        for (i, v) in g.buckets.iter().enumerate() {
            rows.push(row("grisvard", j, format!("i_{i}"), *v));
        }
        rows.push(row("grisvard", j, "relative_distance".into(), g.relative));
    }
    attach_fits(&mut rows);
    Ok(rows)
}
