//! Riesz transforms `R_j` with symbol `i xi_j / |xi|`, a principal-value oracle,
//! the Poisson-kernel identities and the `B^{1,1}` ratio.
//!
//! With the transform `f^(xi) = int f e^{-2 pi i x xi}` used throughout the crate,
//! this symbol is the operator `c_n PV int f(x + y) y_j / |y|^{n+1} dy`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::besov::{besov_seminorm_with, BesovOptions, BesovParams};
use crate::error::{invalid, Error, Result};
use crate::extension::{extend, ExtensionField, HalfSpaceField};
use crate::grid::{GridFunction, GridSpec};
use crate::kernels::{kernel_values_spectral, poisson_constant, KernelDerivative, KernelKind};
use crate::spectral::{convolve, forward_transform, MultiIndex, Nyquist, SpectralFunction};
use crate::Complex64;

/// Direction `j` in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RieszIndex(usize);

impl RieszIndex {
    pub fn new(j: usize, n: usize) -> Result<Self> {
        if j >= n {
            return Err(invalid(format!("Riesz direction {j} outside 0..{n}")));
        }
        Ok(Self(j))
    }

    pub fn get(&self) -> usize {
        self.0
    }
}

fn riesz_symbol(j: usize, xi: &[f64]) -> Complex64 {
    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, xi[j] / r)
    }
}

pub fn riesz_spectral(hat: &SpectralFunction, j: RieszIndex) -> Result<SpectralFunction> {
    hat.apply_symbol(|xi| riesz_symbol(j.0, xi), Nyquist::ZeroShell)
}

/// Zero on the mean mode and on the Nyquist shell.
pub fn riesz_transform(f: &GridFunction, j: RieszIndex) -> Result<GridFunction> {
    Ok(riesz_spectral(&forward_transform(f), j)?.inverse())
}

/// Truncated singular integral `c_n sum_{|y| >= eps} f(x + y) y_j / |y|^{n+1} |cell|`.
/// In one dimension the kernel is periodized exactly, `(1/L) cot(pi y / L)`; in two
/// dimensions it is the lattice kernel on the fundamental cell.
pub fn riesz_pv_oracle(f: &GridFunction, j: RieszIndex, epsilon: f64) -> Result<GridFunction> {
    let spec = *f.spec();
    if epsilon < spec.step() * (1.0 - 1e-12) {
        return Err(Error::Resolution(format!(
            "epsilon {epsilon} is below the grid step {}",
            spec.step()
        )));
    }
    let n = spec.dim();
    let l = spec.length();
    let cut = epsilon * (1.0 - 1e-12);
    let cn = poisson_constant(n);
    // kernel at -y so the convolution evaluates f(x + y)
    let kernel = GridFunction::from_fn(spec, |x| {
        let y = [-x[0], -x[1]];
        let r = (y[0] * y[0] + y[1] * y[1]).sqrt();
        if r < cut {
            return 0.0;
        }
        if n == 1 {
            if x[0] == -l / 2.0 {
                return 0.0;
            }
            (PI * y[0] / l).tan().recip() / l
        } else {
            cn * y[j.0] / r.powi(3)
        }
    })?;
    convolve(&kernel, f)
}

/// `R_j(d_t P_t) = -d_j P_t` and `R_i(d_t d_j P_t) = -d_i d_j P_t` for this
/// operator; residuals are relative sup errors of the kernel samples off the
/// Nyquist shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelIdentity {
    pub residual: f64,
    /// Same comparison with the opposite sign.
    pub literal_residual: f64,
}

fn poisson_samples(beta: [usize; 2], l: usize, t: f64, spec: &GridSpec) -> Result<GridFunction> {
    let kd = KernelDerivative::new(KernelKind::Poisson, MultiIndex::new(beta, l)?, t)?;
    kernel_values_spectral(&kd, spec)
}

/// Drops the Nyquist shell, where every Riesz transform vanishes by convention.
fn off_shell(f: &GridFunction) -> Result<GridFunction> {
    Ok(forward_transform(f)
        .apply_symbol(|_| Complex64::new(1.0, 0.0), Nyquist::ZeroShell)?
        .inverse())
}

fn relative_sup(a: &GridFunction, b: &GridFunction) -> Result<f64> {
    let s = b.sup_norm();
    let d = a.sub(b)?.sup_norm();
    Ok(if s > 0.0 { d / s } else { d })
}

pub fn riesz_kernel_identity(t: f64, j: RieszIndex, spec: &GridSpec) -> Result<KernelIdentity> {
    let mut bj = [0, 0];
    bj[j.0] = 1;
    let lhs = riesz_transform(&poisson_samples([0, 0], 1, t, spec)?, j)?;
    let rhs = off_shell(&poisson_samples(bj, 0, t, spec)?)?;
    Ok(KernelIdentity {
        residual: relative_sup(&lhs, &rhs.scale(-1.0))?,
        literal_residual: relative_sup(&lhs, &rhs)?,
    })
}

/// Differentiated form with directions `i` (Riesz) and `j` (derivative).
pub fn riesz_hessian_identity(t: f64, i: RieszIndex, j: RieszIndex, spec: &GridSpec) -> Result<KernelIdentity> {
    let mut bj = [0, 0];
    bj[j.0] = 1;
    let mut bij = bj;
    bij[i.0] += 1;
    let lhs = riesz_transform(&poisson_samples(bj, 1, t, spec)?, i)?;
    let rhs = off_shell(&poisson_samples(bij, 0, t, spec)?)?;
    Ok(KernelIdentity {
        residual: relative_sup(&lhs, &rhs.scale(-1.0))?,
        literal_residual: relative_sup(&lhs, &rhs)?,
    })
}

/// `int f g` against `sum_j int R_j f R_j g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pairing {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - nyquist_mode - rhs|` over the larger side.
    pub relative_error: f64,
    /// `L^{-n} f^(0) g^(0)`: the part the transforms cannot see.
    pub mean_mode: f64,
    /// Share of `int f g` on the Nyquist shell, where the multiplier is zero.
    pub nyquist_mode: f64,
}

pub fn parseval_pairing_check(f: &GridFunction, g: &GridFunction) -> Result<Pairing> {
    if f.spec() != g.spec() {
        return Err(Error::GridMismatch);
    }
    let spec = *f.spec();
    let lhs = f.mul(g)?.integral();
    let mut rhs = 0.0;
    for j in 0..spec.dim() {
        let idx = RieszIndex::new(j, spec.dim())?;
        rhs += riesz_transform(f, idx)?.mul(&riesz_transform(g, idx)?)?.integral();
    }
    let (fh, gh) = (forward_transform(f), forward_transform(g));
    let mut nyquist_mode = 0.0;
    for (k, (a, b)) in fh.coeffs().iter().zip(gh.coeffs()).enumerate() {
        let i = spec.unravel(k);
        if spec.is_nyquist(i[0]) || (spec.dim() == 2 && spec.is_nyquist(i[1])) {
            nyquist_mode += (a * b.conj()).re;
        }
    }
    nyquist_mode /= spec.volume();
    let scale = lhs.abs().max(rhs.abs());
    Ok(Pairing {
        lhs,
        rhs,
        relative_error: if scale > 0.0 {
            (lhs - nyquist_mode - rhs).abs() / scale
        } else {
            0.0
        },
        mean_mode: f.integral() * g.integral() / spec.volume(),
        nyquist_mode,
    })
}

/// `P_t * f` against `sum_i R_i(P_t) * R_i(f)`, which equals `-P_t * f` on
/// mean-zero data since the symbols square to `-xi_i^2 / |xi|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonDecomposition {
    /// Relative sup error of `P_t * f = -sum_i R_i(P_t) * R_i(f)`.
    pub residual: f64,
    /// Same without the sign.
    pub literal_residual: f64,
}

pub fn poisson_decomposition_check(f: &GridFunction, t: f64) -> Result<PoissonDecomposition> {
    let spec = *f.spec();
    let field = ExtensionField::new(f, KernelKind::Poisson);
    let u = off_shell(&field.value(t)?)?;
    let mut s = GridFunction::zeros(spec);
    for i in 0..spec.dim() {
        let idx = RieszIndex::new(i, spec.dim())?;
        let pi = riesz_transform(&poisson_samples([0, 0], 0, t, &spec)?, idx)?;
        s = s.add(&convolve(&pi, &riesz_transform(f, idx)?)?)?;
    }
    Ok(PoissonDecomposition {
        residual: relative_sup(&s.scale(-1.0), &u)?,
        literal_residual: relative_sup(&s, &u)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RieszRatio {
    pub function_id: String,
    pub direction: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
    /// Mean subtracted before transforming.
    pub mean_removed: f64,
}

/// `|R_j f|_{B^{1,1}_1} / |f|_{B^{1,1}_1}` on the mean-zero part of `f`.
pub fn riesz_besov_ratio(id: &str, f: &GridFunction, j: RieszIndex) -> Result<RieszRatio> {
    let mean = f.mean();
    let g = f.mean_zero();
    let bp = BesovParams::new(1.0, 1.0, 1.0)?;
    let opts = BesovOptions {
        floor: None,
        far_field: false,
        near_field: f.spec().dim() == 1,
    };
    let rhs = besov_seminorm_with(&g, &bp, &opts)?.value;
    let lhs = besov_seminorm_with(&riesz_transform(&g, j)?, &bp, &opts)?.value;
    Ok(RieszRatio {
        function_id: id.into(),
        direction: j.0,
        lhs,
        rhs,
        ratio: if rhs > 0.0 { Some(lhs / rhs) } else { None },
        mean_removed: mean,
    })
}

/// Poisson extension of `f`, for callers that pair it with Riesz transforms.
pub fn poisson_extension(f: &GridFunction, t: f64) -> Result<GridFunction> {
    extend(f, KernelKind::Poisson, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec1() -> GridSpec {
        GridSpec::new(1, 512, 16.0).unwrap()
    }

    fn bump(spec: GridSpec) -> GridFunction {
        GridFunction::from_fn(spec, |x| {
            (-(x[0] * x[0] + x[1] * x[1])).exp() * (1.0 + 0.5 * (2.0 * x[0]).sin())
        })
        .unwrap()
    }

    #[test]
    fn cosine_goes_to_minus_sine() {
        let spec = spec1();
        let l = spec.length();
        let f = GridFunction::from_fn(spec, |x| (2.0 * PI * x[0] / l).cos()).unwrap();
        let g = GridFunction::from_fn(spec, |x| -(2.0 * PI * x[0] / l).sin()).unwrap();
        let r = riesz_transform(&f, RieszIndex::new(0, 1).unwrap()).unwrap();
        assert!(r.sub(&g).unwrap().sup_norm() < 1e-13);
        let c = GridFunction::constant(spec, 2.0);
        assert!(riesz_transform(&c, RieszIndex::new(0, 1).unwrap()).unwrap().sup_norm() < 1e-15);
    }

    #[test]
    fn squares_sum_to_minus_identity() {
        let spec = GridSpec::new(2, 64, 16.0).unwrap();
        let f = bump(spec).mean_zero();
        let mut s = GridFunction::zeros(spec);
        for j in 0..2 {
            let idx = RieszIndex::new(j, 2).unwrap();
            s = s
                .add(&riesz_transform(&riesz_transform(&f, idx).unwrap(), idx).unwrap())
                .unwrap();
        }
        assert!(s.add(&f).unwrap().sup_norm() <= 1e-10);
    }

    #[test]
    fn pv_oracle_agrees() {
        let spec = spec1();
        let f = bump(spec);
        let idx = RieszIndex::new(0, 1).unwrap();
        let spectral = riesz_transform(&f, idx).unwrap();
        let pv = riesz_pv_oracle(&f, idx, 2.0 * spec.step()).unwrap();
        let rel = pv.sub(&spectral).unwrap().l1_norm() / spectral.l1_norm();
        assert!(rel < 0.05, "{rel}");
        assert!(riesz_pv_oracle(&f, idx, 0.5 * spec.step()).is_err());
        assert_eq!(riesz_pv_oracle(&f.scale(0.0), idx, 0.1).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn pv_oracle_parity() {
        let spec = spec1();
        let f = GridFunction::from_fn(spec, |x| (-x[0] * x[0]).exp()).unwrap();
        let pv = riesz_pv_oracle(&f, RieszIndex::new(0, 1).unwrap(), 0.1).unwrap();
        let n = spec.size();
        let scale = pv.sup_norm();
        for i in 1..n / 2 {
            let a = pv.values()[n / 2 + i];
            let b = pv.values()[n / 2 - i];
            assert!((a + b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn kernel_identities() {
        for n in [1, 2] {
            let spec = GridSpec::new(n, if n == 1 { 1024 } else { 128 }, 16.0).unwrap();
            for t in [0.25, 1.0, 4.0] {
                for j in 0..n {
                    let idx = RieszIndex::new(j, n).unwrap();
                    let r = riesz_kernel_identity(t, idx, &spec).unwrap();
                    assert!(r.residual <= 1e-10, "n={n} t={t}: {}", r.residual);
                    assert!(r.literal_residual > 1.0);
                    for i in 0..n {
                        let h = riesz_hessian_identity(t, RieszIndex::new(i, n).unwrap(), idx, &spec).unwrap();
                        assert!(h.residual <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_and_decomposition() {
        let spec = spec1();
        let l = spec.length();
        let c = GridFunction::from_fn(spec, |x| (2.0 * PI * x[0] / l).cos()).unwrap();
        let p = parseval_pairing_check(&c, &c).unwrap();
        assert!((p.lhs - l / 2.0).abs() < 1e-12 && (p.rhs - l / 2.0).abs() < 1e-12);
        let f = bump(spec);
        let p = parseval_pairing_check(&f, &f).unwrap();
        assert!(p.relative_error > 0.0);
        assert!(((p.lhs - p.rhs) - p.mean_mode).abs() < 1e-10 * p.lhs);
        let z = f.mean_zero();
        for t in [0.25, 1.0, 4.0] {
            let d = poisson_decomposition_check(&z, t).unwrap();
            assert!(d.residual <= 1e-10, "{}", d.residual);
        }
        let d = poisson_decomposition_check(&c, 1.0).unwrap();
        assert!(d.residual <= 1e-12);
    }

    #[test]
    fn besov_ratio_flags_zero() {
        let spec = spec1();
        let r = riesz_besov_ratio("zero", &GridFunction::zeros(spec), RieszIndex::new(0, 1).unwrap()).unwrap();
        assert!(r.ratio.is_none());
        let r = riesz_besov_ratio("bump", &bump(spec), RieszIndex::new(0, 1).unwrap()).unwrap();
        assert!(r.ratio.unwrap() > 0.0);
    }
}
