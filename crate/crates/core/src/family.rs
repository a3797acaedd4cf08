//! Seeded test-function families for the ratio experiments.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::{GridFunction, GridSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MemberShape {
    /// `exp(-4 |x|^2 / w^2)`.
    Gaussian { width: f64 },
    /// `exp(-1 / (1 - (r/2)^2))` with `r = |x - c e_1|`.
    Bump { center: f64 },
    /// `exp(-|x|^2) cos(2 pi omega x_1)`.
    Modulated { omega: f64 },
    /// `exp(-|x|^2) prod_axis sum_k (a_k cos + b_k sin)(2 pi k x / L) / k`.
    Random { period: f64, coeffs: Vec<Vec<(f64, f64)>> },
}

impl MemberShape {
    fn eval(&self, x: [f64; 2], n: usize) -> f64 {
        let r2 = x[0] * x[0] + if n == 2 { x[1] * x[1] } else { 0.0 };
        match self {
            MemberShape::Gaussian { width } => (-4.0 * r2 / (width * width)).exp(),
            MemberShape::Bump { center } => {
                let dx = x[0] - center;
                let s = (dx * dx + r2 - x[0] * x[0]) / 4.0;
                if s >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - s)).exp()
                }
            }
            MemberShape::Modulated { omega } => (-r2).exp() * (2.0 * PI * omega * x[0]).cos(),
            MemberShape::Random { period, coeffs } => {
                let env = (-r2).exp();
                if env == 0.0 {
                    return 0.0;
                }
                let mut v = env;
                for (axis, modes) in coeffs.iter().enumerate().take(n) {
                    let th = 2.0 * PI * x[axis] / period;
                    let s: f64 = modes
                        .iter()
                        .enumerate()
                        .map(|(k, (a, b))| {
                            let kk = (k + 1) as f64;
                            (a * (kk * th).cos() + b * (kk * th).sin()) / kk
                        })
                        .sum();
                    v *= s;
                }
                v
            }
        }
    }
}

/// One member: an analytic shape with the scale that normalizes it on the
/// generating grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyMember {
    pub id: String,
    pub shape: MemberShape,
    pub scale: f64,
    /// `sup |f|` on the outermost layer of the generating grid.
    pub boundary_tail: f64,
}

impl FamilyMember {
    pub fn eval(&self, x: [f64; 2], n: usize) -> f64 {
        self.scale * self.shape.eval(x, n)
    }

    pub fn sample(&self, spec: &GridSpec) -> Result<GridFunction> {
        self.sample_dilated(spec, 1.0)
    }

    /// `x -> f(lambda x)` sampled on `spec`.
    pub fn sample_dilated(&self, spec: &GridSpec, lambda: f64) -> Result<GridFunction> {
        let n = spec.dim();
        GridFunction::from_fn(*spec, |x| self.eval([lambda * x[0], lambda * x[1]], n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyOptions {
    pub seed: u64,
    pub count: usize,
    /// Highest mode of the random fields; `None` means `N / 8`.
    pub max_mode: Option<usize>,
}

/// Three Gaussians, two bumps, two modulated Gaussians, then random fields,
/// truncated to `count` and each normalized to unit L1 on `spec`.
pub fn family_members(spec: &GridSpec, opts: &FamilyOptions) -> Result<Vec<FamilyMember>> {
    if opts.count == 0 {
        return Err(invalid("family count must be at least 1"));
    }
    let max_mode = opts.max_mode.unwrap_or(spec.size() / 8).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut shapes: Vec<(String, MemberShape)> = Vec::new();
    for w in [0.5, 1.0, 2.0] {
        shapes.push((format!("gauss_w{w}"), MemberShape::Gaussian { width: w }));
    }
    for c in [-1.5, 2.5] {
        shapes.push((format!("bump_c{c}"), MemberShape::Bump { center: c }));
    }
    for o in [1.0, 2.0] {
        shapes.push((format!("modulated_w{o}"), MemberShape::Modulated { omega: o }));
    }
    let mut k = 0;
    while shapes.len() < opts.count {
        let coeffs = (0..spec.dim())
            .map(|_| {
                (0..max_mode)
                    .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        shapes.push((
            format!("random_{k}"),
            MemberShape::Random {
                period: spec.length(),
                coeffs,
            },
        ));
        k += 1;
    }
    shapes.truncate(opts.count);
    shapes
        .into_iter()
        .map(|(id, shape)| {
            let raw = FamilyMember {
                id,
                shape,
                scale: 1.0,
                boundary_tail: 0.0,
            };
            let g = raw.sample(spec)?;
            let l1 = g.l1_norm();
            if !(l1 > 0.0) {
                return Err(invalid(format!("member {} vanishes on the grid", raw.id)));
            }
            let scale = 1.0 / l1;
            Ok(FamilyMember {
                boundary_tail: g.boundary_tail() * scale,
                scale,
                ..raw
            })
        })
        .collect()
}

/// Sampled family with the default mode cap.
pub fn family_generator(seed: u64, spec: &GridSpec, count: usize) -> Result<Vec<GridFunction>> {
    family_members(
        spec,
        &FamilyOptions {
            seed,
            count,
            max_mode: None,
        },
    )?
    .iter()
    .map(|m| m.sample(spec))
    .collect()
}

/// `exp(-|x|^2)`, the reference function of the ratio experiments.
pub fn reference_member(spec: &GridSpec) -> FamilyMember {
    let shape = MemberShape::Gaussian { width: 2.0 };
    let raw = FamilyMember {
        id: "reference".into(),
        shape,
        scale: 1.0,
        boundary_tail: 0.0,
    };
    let tail = raw.sample(spec).map(|g| g.boundary_tail()).unwrap_or(0.0);
    FamilyMember {
        boundary_tail: tail,
        ..raw
    }
}
