use std::f64::consts::PI;

use proptest::prelude::*;
use tracelab::kernels::{
    gauss_derivative_at, heat_identity_residual, heat_time_integral, kernel_l1_decay, kernel_multiplier, kernel_values,
    kernel_values_spectral, semigroup_residual, semigroup_split_residual,
};
use tracelab::{forward_transform, Error, GridFunction, GridSpec, KernelDerivative, KernelKind, MultiIndex};

fn gauss(alpha: MultiIndex, t: f64) -> KernelDerivative {
    KernelDerivative::new(KernelKind::GaussWeierstrass, alpha, t).unwrap()
}

#[test]
fn point_values_at_origin() {
    let spec1 = GridSpec::new(1, 128, 16.0).unwrap();
    let spec2 = GridSpec::new(2, 64, 16.0).unwrap();
    let w1 = kernel_values(&gauss(MultiIndex::zero(), 1.0), &spec1).unwrap();
    assert!((w1.values()[0] - 0.282_094_791_773_878_14).abs() < 1e-12);
    let w2 = kernel_values(&gauss(MultiIndex::zero(), 1.0), &spec2).unwrap();
    assert!((w2.values()[0] - 1.0 / (4.0 * PI)).abs() < 1e-12);
    assert!((tracelab::kernels::poisson_constant(1) - 1.0 / PI).abs() < 1e-15);
    // c_2 = Gamma(3/2) / pi^(3/2) = 1 / (2 pi)
    assert!((tracelab::kernels::poisson_constant(2) - 0.5 / PI).abs() < 1e-15);
}

#[test]
fn rejects_non_positive_time_and_order_cap() {
    assert!(KernelDerivative::new(KernelKind::Poisson, MultiIndex::zero(), 0.0).is_err());
    assert!(KernelDerivative::new(KernelKind::GaussWeierstrass, MultiIndex::zero(), -1.0).is_err());
    assert!(matches!(MultiIndex::new([2, 2], 1), Err(Error::OrderCap(5))));
}

#[test]
fn exact_identities_at_stated_sizes() {
    let s1 = GridSpec::new(1, 256, 16.0).unwrap();
    let s2 = GridSpec::new(2, 128, 16.0).unwrap();
    assert!(heat_identity_residual(1.0, &s1).unwrap() <= 1e-8);
    assert!(heat_identity_residual(0.25, &s2).unwrap() <= 1e-8);
    assert!(heat_identity_residual(4.0, &s1).unwrap() <= 1e-8);
    for t in [0.1, 1.0, 7.0] {
        assert!(semigroup_residual(t, &s2).unwrap() <= 1e-14);
    }
    assert!(semigroup_split_residual(1.0, &s1, [0, 0], [0, 0]).unwrap() <= 1e-10);
    assert!(semigroup_split_residual(1.0, &s1, [1, 0], [2, 0]).unwrap() <= 1e-8);
}

#[test]
fn composed_gaussian_multipliers() {
    let spec = GridSpec::new(2, 32, 16.0).unwrap();
    let f = GridFunction::from_fn(spec, |x| (-(x[0] * x[0] + x[1] * x[1]) / 3.0).exp() * (1.0 + x[0])).unwrap();
    let hat = forward_transform(&f);
    for t in [0.2, 1.0, 3.0] {
        let half = kernel_multiplier(&gauss(MultiIndex::zero(), t / 2f64.sqrt()));
        let full = kernel_multiplier(&gauss(MultiIndex::zero(), t));
        let twice = hat
            .apply_multiplier(|xi| half.eval(xi))
            .unwrap()
            .apply_multiplier(|xi| half.eval(xi))
            .unwrap();
        let once = hat.apply_multiplier(|xi| full.eval(xi)).unwrap();
        for (a, b) in twice.coeffs().iter().zip(once.coeffs()) {
            assert!((a - b).norm() <= 1e-12);
        }
    }
}

#[test]
fn evenness_and_mixed_mean_zero() {
    let spec = GridSpec::new(2, 64, 16.0).unwrap();
    for (beta, l) in [
        ([0, 0], 0),
        ([2, 0], 0),
        ([1, 1], 0),
        ([0, 2], 2),
        ([1, 0], 1),
        ([0, 0], 3),
        ([2, 1], 0),
    ] {
        for kind in [KernelKind::GaussWeierstrass, KernelKind::Poisson] {
            let kd = KernelDerivative::new(kind, MultiIndex::new(beta, l).unwrap(), 0.7).unwrap();
            let v = kernel_values(&kd, &spec).unwrap();
            let n = spec.size();
            for i in 0..n {
                for j in 0..n {
                    let a = v.values()[spec.ravel([i, j])];
                    let b = v.values()[spec.ravel([(n - i) % n, (n - j) % n])];
                    if (beta[0] + beta[1]) % 2 == 0 {
                        assert_eq!(a, b, "{kind:?} {beta:?} {l}");
                    } else {
                        assert_eq!(a, -b, "{kind:?} {beta:?} {l}");
                    }
                }
            }
        }
    }
    let mixed = kernel_values(&gauss(MultiIndex::space([1, 1]).unwrap(), 1.0), &spec).unwrap();
    assert!(mixed.integral().abs() <= 1e-12);
}

#[test]
fn positivity_and_mass() {
    for n in [1, 2] {
        let spec = GridSpec::new(n, if n == 1 { 1024 } else { 256 }, 16.0).unwrap();
        for t in [0.25, 1.0, 2.0] {
            let w = kernel_values(&gauss(MultiIndex::zero(), t), &spec).unwrap();
            assert!(w.values().iter().all(|&v| v > 0.0));
            assert!((w.integral() - 1.0).abs() <= 1e-10);
            let pk = KernelDerivative::new(KernelKind::Poisson, MultiIndex::zero(), t).unwrap();
            let p = kernel_values(&pk, &spec).unwrap();
            assert!(p.values().iter().all(|&v| v > 0.0));
            assert!((p.integral() - 1.0).abs() <= 1e-6, "n={n} t={t}: {}", p.integral());
        }
    }
}

#[test]
fn analytic_and_spectral_paths_agree() {
    let spec1 = GridSpec::new(1, 1024, 16.0).unwrap();
    let spec2 = GridSpec::new(2, 256, 16.0).unwrap();
    for spec in [spec1, spec2] {
        for order in 0..=3 {
            for alpha in MultiIndex::of_order(spec.dim(), order).into_iter().map(|(a, _)| a) {
                for t in [0.5, 1.0, 2.0] {
                    let kd = gauss(alpha, t);
                    let a = kernel_values(&kd, &spec).unwrap();
                    let s = kernel_values_spectral(&kd, &spec).unwrap();
                    assert!(a.sub(&s).unwrap().sup_norm() <= 1e-8, "{alpha:?} t={t}");
                }
            }
        }
    }
}

#[test]
fn heat_integral_oracles() {
    let a1 = MultiIndex::space([1, 0]).unwrap();
    let r = heat_time_integral(1, &a1, 0.0, [1.0, 0.0], 1e8).unwrap();
    assert!((r.value - 0.282_094_791_773_878_14).abs() < 1e-8);
    let products: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0]
        .iter()
        .map(|&x| heat_time_integral(1, &a1, 0.0, [x, 0.0], 1e8).unwrap().value * x)
        .collect();
    for p in &products {
        assert!((p - products[2]).abs() <= 1e-8);
    }
    // n = 2, alpha = 0, b = 0: int t^-2 exp(-r^2/4t^2) / 4 pi dt = 1 / (4 sqrt(pi) r)
    let r2 = heat_time_integral(2, &MultiIndex::zero(), 0.0, [0.6, 0.8], 1e8).unwrap();
    assert!((r2.value + r2.tail_bound - 0.141_047_395_886_939_07).abs() < 1e-8);
    assert!(matches!(
        heat_time_integral(1, &MultiIndex::zero(), 0.0, [1.0, 0.0], 1e8),
        Err(Error::Hypothesis(_))
    ));
}

#[test]
fn heat_integral_homogeneity_other_exponents() {
    // alpha = 2, b = 1 in n = 1: exponent 1
    let a2 = MultiIndex::space([2, 0]).unwrap();
    let base = heat_time_integral(1, &a2, 1.0, [1.0, 0.0], 1e8).unwrap().value;
    for x in [0.25, 0.5, 2.0, 4.0] {
        let v = heat_time_integral(1, &a2, 1.0, [x, 0.0], 1e8).unwrap().value;
        assert!((v * x - base).abs() <= 1e-7 * base, "x={x}");
    }
}

#[test]
fn l1_decay_scaling() {
    for order in 1..=3usize {
        let alpha = MultiIndex::space([order, 0]).unwrap();
        let base = kernel_l1_decay(1, &alpha, 1.0).unwrap();
        for t in [0.5, 2.0] {
            let v = kernel_l1_decay(1, &alpha, t).unwrap() * t.powi(order as i32);
            assert!((v - base).abs() <= 1e-8 * base, "order {order} t {t}");
        }
    }
    let d2 = kernel_l1_decay(1, &MultiIndex::space([2, 0]).unwrap(), 1.0).unwrap();
    assert!((d2 - 0.483_941_449_038_286_73).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `W_t(x) = t^-n W_1(x / t)` carried through the derivatives.
    #[test]
    fn dyadic_time_scaling(j in -3i32..=3, b0 in 0usize..=2, b1 in 0usize..=1, l in 0usize..=1,
                           x0 in -3.0f64..3.0, x1 in -3.0f64..3.0, n in 1usize..=2) {
        let t = 2f64.powi(j);
        let beta = if n == 1 { [b0, 0] } else { [b0, b1] };
        let alpha = MultiIndex::new(beta, l).unwrap();
        let x = if n == 1 { [x0, 0.0] } else { [x0, x1] };
        let lhs = gauss_derivative_at(n, &alpha, t, x);
        let scale = t.powi(-(n as i32) - alpha.order() as i32);
        let rhs = scale * gauss_derivative_at(n, &alpha, 1.0, [x[0] / t, x[1] / t]);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (lhs.abs() + rhs.abs()).max(1e-300));
    }
}
