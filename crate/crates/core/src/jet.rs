//! Truncated Taylor arithmetic and the smooth cutoff profiles built on it.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

/// Highest derivative order carried by a [`Jet`].
pub const JET_ORDER: usize = 7;

/// Taylor coefficients `c_k = f^(k)(t0) / k!` for `k <= JET_ORDER`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; JET_ORDER + 1],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; JET_ORDER + 1];
        c[0] = v;
        Self { c }
    }

    /// The identity function expanded at `t0`.
    pub fn variable(t0: f64) -> Self {
        let mut c = [0.0; JET_ORDER + 1];
        c[0] = t0;
        c[1] = 1.0;
        Self { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `f^(k)(t0)`.
    pub fn derivative(&self, k: usize) -> f64 {
        self.c[k] * (1..=k).map(|i| i as f64).product::<f64>()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut c = self.c;
        c.iter_mut().for_each(|v| *v *= s);
        Self { c }
    }

    pub fn exp(&self) -> Self {
        // g' = f' g
        let mut g = [0.0; JET_ORDER + 1];
        g[0] = self.c[0].exp();
        for k in 1..=JET_ORDER {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * g[k - j];
            }
            g[k] = s / k as f64;
        }
        Self { c: g }
    }

    pub fn recip(&self) -> Self {
        let mut g = [0.0; JET_ORDER + 1];
        g[0] = 1.0 / self.c[0];
        for k in 1..=JET_ORDER {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.c[j] * g[k - j];
            }
            g[k] = -s * g[0];
        }
        Self { c: g }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut c = self.c;
        c.iter_mut().zip(o.c).for_each(|(a, b)| *a += b);
        Jet { c }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; JET_ORDER + 1];
        for i in 0..=JET_ORDER {
            for j in 0..=JET_ORDER - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

/// Smooth step: 0 for `u <= 0`, 1 for `u >= 1`, `1 / (1 + exp(1/u - 1/(1-u)))` between.
pub fn smooth_step(u: Jet) -> Jet {
    let x = u.value();
    if x <= 0.0 {
        return Jet::constant(0.0);
    }
    if x >= 1.0 {
        return Jet::constant(1.0);
    }
    let e = u.recip() - (Jet::constant(1.0) - u).recip();
    if e.value() > 700.0 {
        return Jet::constant(0.0);
    }
    if e.value() < -700.0 {
        return Jet::constant(1.0);
    }
    (Jet::constant(1.0) + e.exp()).recip()
}

/// Pinned cutoff profiles in the normal variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutoffProfile {
    /// 1 on `[0, 1]`, 0 on `[2, inf)`, nonincreasing. Also serves as the
    /// compactly supported `phi` with `phi(0) = 1` and flat derivatives at 0.
    Psi,
    /// 0 on `[0, 1]`, 1 on `[2, inf)`.
    Grisvard,
}

impl CutoffProfile {
    pub fn jet(&self, t: f64) -> Jet {
        let s = smooth_step(Jet::variable(t) - Jet::constant(1.0));
        match self {
            CutoffProfile::Psi => Jet::constant(1.0) - s,
            CutoffProfile::Grisvard => s,
        }
    }

    /// Jet of `t -> profile(l t)` at `t`.
    pub fn scaled_jet(&self, l: f64, t: f64) -> Jet {
        let inner = self.jet(l * t);
        let mut out = Jet::constant(0.0);
        let mut pow = 1.0;
        for k in 0..=JET_ORDER {
            out.c[k] = inner.c[k] * pow;
            pow *= l;
        }
        out
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t).value()
    }

    pub fn derivative(&self, t: f64, k: usize) -> f64 {
        self.jet(t).derivative(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_closed_forms() {
        let x = Jet::variable(0.3);
        let e = (x * x).exp();
        // d/dt exp(t^2) = 2t exp(t^2)
        let v = (0.09f64).exp();
        assert!((e.derivative(1) - 0.6 * v).abs() < 1e-14);
        assert!((e.derivative(2) - (2.0 + 4.0 * 0.09) * v).abs() < 1e-13);
        let r = x.recip();
        assert!((r.derivative(3) + 6.0 / 0.3f64.powi(4)).abs() < 1e-9);
    }

    #[test]
    fn profile_shape() {
        let p = CutoffProfile::Psi;
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(1.0), 1.0);
        assert_eq!(p.value(2.0), 0.0);
        assert_eq!(p.value(3.0), 0.0);
        for k in 1..=4 {
            assert_eq!(p.derivative(0.5, k), 0.0);
        }
        let mut prev = 1.0;
        for i in 0..=200 {
            let v = p.value(1.0 + i as f64 / 200.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!((p.value(1.5) - 0.5).abs() < 1e-15);
        let g = CutoffProfile::Grisvard;
        assert!((g.value(1.3) + p.value(1.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = CutoffProfile::Psi;
        let h = 1e-4;
        for &t in &[1.2, 1.5, 1.8] {
            for k in 1..=4 {
                let fd = (p.derivative(t + h, k - 1) - p.derivative(t - h, k - 1)) / (2.0 * h);
                let exact = p.derivative(t, k);
                assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "t={t} k={k}");
            }
        }
    }

    #[test]
    fn scaling_by_l() {
        let p = CutoffProfile::Psi;
        let j = p.scaled_jet(4.0, 0.3);
        assert!((j.derivative(2) - 16.0 * p.derivative(1.2, 2)).abs() < 1e-10);
    }
}
