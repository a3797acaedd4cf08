use std::f64::consts::PI;

use proptest::prelude::*;
use tracelab::family::{family_members, FamilyOptions};
use tracelab::riesz::{
    parseval_pairing_check, poisson_decomposition_check, riesz_besov_ratio, riesz_hessian_identity,
    riesz_kernel_identity, riesz_pv_oracle, riesz_transform, RieszIndex,
};
use tracelab::{forward_transform, partial_derivative, GridFunction, GridSpec, MultiIndex};

fn idx(j: usize, n: usize) -> RieszIndex {
    RieszIndex::new(j, n).unwrap()
}

fn band_limited(spec: GridSpec, seed: u64, modes: i64) -> GridFunction {
    let l = spec.length();
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut terms = Vec::new();
    for k0 in -modes..=modes {
        for k1 in if spec.dim() == 2 { -modes..=modes } else { 0..=0 } {
            terms.push((k0 as f64, k1 as f64, next(), next()));
        }
    }
    GridFunction::from_fn(spec, |x| {
        terms
            .iter()
            .map(|(k0, k1, a, b)| {
                let th = 2.0 * PI * (k0 * x[0] + k1 * x[1]) / l;
                a * th.cos() + b * th.sin()
            })
            .sum()
    })
    .unwrap()
    .mean_zero()
}

#[test]
fn multiplier_examples() {
    let spec = GridSpec::new(1, 256, 16.0).unwrap();
    let l = spec.length();
    for k in 1..=5 {
        let th = move |x: [f64; 2]| 2.0 * PI * k as f64 * x[0] / l;
        let c = GridFunction::from_fn(spec, |x| th(x).cos()).unwrap();
        let s = GridFunction::from_fn(spec, |x| th(x).sin()).unwrap();
        let r = riesz_transform(&c, idx(0, 1)).unwrap();
        assert!(r.add(&s).unwrap().sup_norm() <= 1e-13, "k={k}");
        let r = riesz_transform(&s, idx(0, 1)).unwrap();
        assert!(r.sub(&c).unwrap().sup_norm() <= 1e-13, "k={k}");
    }
    for n in [1, 2] {
        let sp = GridSpec::new(n, 32, 8.0).unwrap();
        let c = GridFunction::constant(sp, -3.5);
        for j in 0..n {
            assert!(riesz_transform(&c, idx(j, n)).unwrap().sup_norm() <= 1e-15);
        }
    }
    assert!(RieszIndex::new(1, 1).is_err());
    assert!(RieszIndex::new(2, 2).is_err());
}

#[test]
fn squares_sum_to_minus_identity_in_two_dimensions() {
    let spec = GridSpec::new(2, 64, 16.0).unwrap();
    for seed in 0..4 {
        let f = band_limited(spec, seed, 6);
        let mut s = GridFunction::zeros(spec);
        for j in 0..2 {
            let r = riesz_transform(&riesz_transform(&f, idx(j, 2)).unwrap(), idx(j, 2)).unwrap();
            s = s.add(&r).unwrap();
        }
        assert!(s.add(&f).unwrap().sup_norm() <= 1e-10 * f.sup_norm().max(1.0));
    }
}

/// `R_j^2` is `-1` on every mode with `xi_j != 0` and `0` on the rest.
#[test]
fn square_per_mode() {
    let spec = GridSpec::new(2, 16, 4.0).unwrap();
    let l = spec.length();
    for k0 in -7i64..=7 {
        for k1 in -7i64..=7 {
            let th = |x: [f64; 2]| 2.0 * PI * (k0 as f64 * x[0] + k1 as f64 * x[1]) / l;
            let f = GridFunction::from_fn(spec, |x| th(x).cos()).unwrap();
            for (j, kj) in [(0, k0), (1, k1)] {
                let r = riesz_transform(&riesz_transform(&f, idx(j, 2)).unwrap(), idx(j, 2)).unwrap();
                let weight = (kj * kj) as f64 / (k0 * k0 + k1 * k1).max(1) as f64;
                let expected = f.scale(-weight);
                assert!(r.sub(&expected).unwrap().sup_norm() <= 1e-13, "({k0}, {k1}) j={j}");
                if kj == 0 {
                    assert!(r.sup_norm() <= 1e-14);
                }
            }
        }
    }
}

#[test]
fn pv_oracle_examples() {
    let spec = GridSpec::new(1, 512, 16.0).unwrap();
    let f = band_limited(spec, 11, 8)
        .mul(&GridFunction::from_fn(spec, |x| (-x[0] * x[0] / 4.0).exp()).unwrap())
        .unwrap();
    let spectral = riesz_transform(&f, idx(0, 1)).unwrap();
    let pv = riesz_pv_oracle(&f, idx(0, 1), 2.0 * spec.step()).unwrap();
    let rel = pv.sub(&spectral).unwrap().l1_norm() / spectral.l1_norm();
    assert!(rel < 0.05, "{rel}");

    // even about c = 1.25 in, odd about c out
    let c = 1.25;
    let g = GridFunction::from_fn(spec, |x| (-(x[0] - c).powi(2)).exp()).unwrap();
    let pv = riesz_pv_oracle(&g, idx(0, 1), 0.25).unwrap();
    let n = spec.size() as i64;
    let ci = (n / 2 + (c / spec.step()).round() as i64) as usize;
    let scale = pv.sup_norm();
    for i in 1..60usize {
        let a = pv.values()[ci + i];
        let b = pv.values()[ci - i];
        assert!((a + b).abs() <= 1e-10 * scale, "i={i}");
    }

    assert!(riesz_pv_oracle(&f, idx(0, 1), 0.9 * spec.step()).is_err());
    assert_eq!(
        riesz_pv_oracle(&f.scale(0.0), idx(0, 1), spec.step())
            .unwrap()
            .sup_norm(),
        0.0
    );

    let spec2 = GridSpec::new(2, 64, 16.0).unwrap();
    let h = GridFunction::from_fn(spec2, |x| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp()).unwrap();
    let pv2 = riesz_pv_oracle(&h, idx(1, 2), 2.0 * spec2.step()).unwrap();
    assert!(pv2.sup_norm() > 0.0 && pv2.values().iter().all(|v| v.is_finite()));
}

#[test]
fn kernel_identities_over_a_t_sweep() {
    for (n, size) in [(1, 1024), (2, 256)] {
        let spec = GridSpec::new(n, size, 16.0).unwrap();
        for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
            for j in 0..n {
                let r = riesz_kernel_identity(t, idx(j, n), &spec).unwrap();
                assert!(r.residual <= 1e-10, "n={n} t={t} j={j}: {}", r.residual);
                // the unsigned comparison is off by twice the field
                assert!((r.literal_residual - 2.0).abs() <= 1e-8);
                for i in 0..n {
                    let h = riesz_hessian_identity(t, idx(i, n), idx(j, n), &spec).unwrap();
                    assert!(h.residual <= 1e-10, "n={n} t={t} ({i}, {j}): {}", h.residual);
                }
            }
        }
    }
    assert!(riesz_kernel_identity(0.0, idx(0, 1), &GridSpec::new(1, 64, 16.0).unwrap()).is_err());
}

#[test]
fn pairing_examples() {
    let spec = GridSpec::new(1, 256, 16.0).unwrap();
    let l = spec.length();
    let c = GridFunction::from_fn(spec, |x| (2.0 * PI * x[0] / l).cos()).unwrap();
    let p = parseval_pairing_check(&c, &c).unwrap();
    assert!((p.lhs - l / 2.0).abs() <= 1e-12 && (p.rhs - l / 2.0).abs() <= 1e-12);

    for (n, size) in [(1, 1024), (2, 256)] {
        let spec = GridSpec::new(n, size, 16.0).unwrap();
        for seed in 0..3 {
            let f = band_limited(spec, seed, 5);
            let g = band_limited(spec, seed + 100, 5);
            let p = parseval_pairing_check(&f, &g).unwrap();
            assert!(p.relative_error <= 1e-10, "n={n}: {}", p.relative_error);
            assert!(p.mean_mode.abs() <= 1e-12);
        }
    }

    // alternating samples live on the Nyquist shell: the transforms see none of it
    let alt = GridFunction::new(
        spec,
        (0..spec.size()).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(),
    )
    .unwrap();
    let p = parseval_pairing_check(&alt, &alt).unwrap();
    assert_eq!(p.rhs, 0.0);
    assert!((p.nyquist_mode - l).abs() <= 1e-12 && (p.lhs - l).abs() <= 1e-12);
    assert!(p.relative_error <= 1e-14);

    let f = GridFunction::from_fn(spec, |x| (-x[0] * x[0]).exp()).unwrap();
    let g = GridFunction::from_fn(spec, |x| (-(x[0] - 0.5).powi(2)).exp()).unwrap();
    let p = parseval_pairing_check(&f, &g).unwrap();
    assert!(((p.lhs - p.rhs) - p.mean_mode).abs() <= 1e-10 * p.lhs);
    assert!(parseval_pairing_check(&f, &GridFunction::zeros(GridSpec::new(1, 128, 16.0).unwrap())).is_err());
}

#[test]
fn poisson_decomposition_examples() {
    let spec = GridSpec::new(1, 256, 16.0).unwrap();
    let l = spec.length();
    let c = GridFunction::from_fn(spec, |x| (6.0 * PI * x[0] / l).sin()).unwrap();
    assert!(poisson_decomposition_check(&c, 1.0).unwrap().residual <= 1e-12);
    for (n, size) in [(1, 1024), (2, 256)] {
        let spec = GridSpec::new(n, size, 16.0).unwrap();
        let f = band_limited(spec, 5, 4);
        let rs: Vec<f64> = [0.25, 1.0, 4.0]
            .iter()
            .map(|&t| poisson_decomposition_check(&f, t).unwrap().residual)
            .collect();
        for r in &rs {
            assert!(*r <= 1e-10, "n={n}: {r}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn commutes_with_derivatives(seed in 0u64..1000, n in 1usize..=2, b0 in 0usize..=3, b1 in 0usize..=2, j in 0usize..2) {
        let spec = GridSpec::new(n, if n == 1 { 128 } else { 32 }, 16.0).unwrap();
        let j = j % n;
        let beta = if n == 1 { [b0, 0] } else { [b0, b1] };
        prop_assume!(beta[0] + beta[1] <= 4);
        let alpha = MultiIndex::space(beta).unwrap();
        let f = band_limited(spec, seed, if n == 1 { 12 } else { 5 });
        let a = riesz_transform(&partial_derivative(&f, &alpha).unwrap(), idx(j, n)).unwrap();
        let b = partial_derivative(&riesz_transform(&f, idx(j, n)).unwrap(), &alpha).unwrap();
        prop_assert!(a.sub(&b).unwrap().sup_norm() <= 1e-12 * a.sup_norm().max(1.0));
    }

    #[test]
    fn multiplier_is_odd(seed in 0u64..1000, n in 1usize..=2) {
        let spec = GridSpec::new(n, if n == 1 { 64 } else { 16 }, 8.0).unwrap();
        let f = band_limited(spec, seed, 3);
        let hat = forward_transform(&riesz_transform(&f, idx(0, n)).unwrap());
        let fh = forward_transform(&f);
        let nn = spec.size() as i64;
        for k0 in -nn / 2 + 1..nn / 2 {
            let k1 = if n == 2 { (k0 * 5) % (nn / 2) } else { 0 };
            let m_plus = hat.coeff([k0, k1]) / fh.coeff([k0, k1]);
            let m_minus = hat.coeff([-k0, -k1]) / fh.coeff([-k0, -k1]);
            if fh.coeff([k0, k1]).norm() > 1e-8 && fh.coeff([-k0, -k1]).norm() > 1e-8 {
                prop_assert!((m_plus + m_minus).norm() <= 1e-10);
            }
        }
    }
}

#[test]
fn besov_ratio_flags_and_invariances() {
    let spec = GridSpec::new(1, 512, 16.0).unwrap();
    let z = riesz_besov_ratio("zero", &GridFunction::zeros(spec), idx(0, 1)).unwrap();
    assert!(z.ratio.is_none());
    let c = riesz_besov_ratio("const", &GridFunction::constant(spec, 1.0), idx(0, 1)).unwrap();
    assert!(c.ratio.is_none());
    assert!((c.mean_removed - 1.0).abs() < 1e-15);

    // R_j f of data with mass decays like 1/|x|, so the torus length has to be large
    // against the width before dilation stops moving the ratio
    let wide = GridSpec::new(1, 2048, 64.0).unwrap();
    let fam = family_members(
        &wide,
        &FamilyOptions {
            seed: 42,
            count: 7,
            max_mode: None,
        },
    )
    .unwrap();
    for m in fam.iter().filter(|m| m.id == "gauss_w1" || m.id == "modulated_w1") {
        let base = riesz_besov_ratio(&m.id, &m.sample(&wide).unwrap(), idx(0, 1))
            .unwrap()
            .ratio
            .unwrap();
        let tol = if m.id == "gauss_w1" { 0.05 } else { 1e-3 };
        for lambda in [0.5, 2.0] {
            let d = m.sample_dilated(&wide, lambda).unwrap();
            let r = riesz_besov_ratio(&m.id, &d, idx(0, 1)).unwrap().ratio.unwrap();
            assert!(
                (r - base).abs() <= tol * base,
                "{} lambda={lambda}: {r} vs {base}",
                m.id
            );
        }
    }
}

#[test]
fn besov_ratio_family_is_refinement_stable() {
    let spec = GridSpec::new(1, 512, 16.0).unwrap();
    let fam = family_members(
        &spec,
        &FamilyOptions {
            seed: 42,
            count: 10,
            max_mode: None,
        },
    )
    .unwrap();
    let mut coarse_max: f64 = 0.0;
    let mut fine_max: f64 = 0.0;
    for m in &fam {
        let a = riesz_besov_ratio(&m.id, &m.sample(&spec).unwrap(), idx(0, 1))
            .unwrap()
            .ratio
            .unwrap();
        let b = riesz_besov_ratio(&m.id, &m.sample(&spec.refined()).unwrap(), idx(0, 1))
            .unwrap()
            .ratio
            .unwrap();
        assert!(a.is_finite() && b.is_finite());
        coarse_max = coarse_max.max(a);
        fine_max = fine_max.max(b);
    }
    assert!(
        (fine_max - coarse_max).abs() <= 0.2 * coarse_max,
        "{coarse_max} -> {fine_max}"
    );
}
