//! Flat `key = value` experiment configuration with dotted keys.
//!
//! ```text
//! # grid
//! grid.n = 1
//! grid.N = 1024
//! grid.L = 16
//! tq.a = 0
//! experiment.ls = 16, 32, 64, 128
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use tracelab::{GridSpec, KernelKind, MultiIndex};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// One `(m, a, p)` case of the ratio experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCase {
    pub m: usize,
    pub a: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub size: usize,
    pub length: f64,
    /// Weight exponent for the single-weight experiments.
    pub a: f64,
    /// Lower end of the t-quadrature for `a >= 0`; negative `a` uses `t_min^(1/(a+1))`.
    pub t_min: f64,
    pub t_max: Option<f64>,
    pub rho: f64,
    pub count: usize,
    pub seed: u64,
    pub max_mode: Option<usize>,
    pub mean_zero: bool,
    pub m: usize,
    pub k: usize,
    pub p: f64,
    pub kind: KernelKind,
    pub grisvard_m: usize,
    pub cases: Vec<RatioCase>,
    pub ls: Vec<f64>,
    pub js: Vec<f64>,
    /// Multiples of the grid step.
    pub floors: Vec<f64>,
    pub ts: Vec<f64>,
    pub out: PathBuf,
    pub plots: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 1,
            size: 1024,
            length: 16.0,
            a: 0.0,
            t_min: 1e-4,
            t_max: None,
            rho: 1.05,
            count: 10,
            seed: 42,
            max_mode: None,
            mean_zero: false,
            m: 2,
            k: 1,
            p: 1.0,
            kind: KernelKind::GaussWeierstrass,
            grisvard_m: 0,
            cases: vec![
                RatioCase { m: 1, a: 0.0, p: 1.0 },
                RatioCase { m: 2, a: 0.0, p: 1.0 },
                RatioCase { m: 2, a: 0.5, p: 1.0 },
                RatioCase { m: 1, a: -0.5, p: 1.0 },
                RatioCase { m: 0, a: 0.0, p: 2.0 },
            ],
            ls: vec![16.0, 32.0, 64.0, 128.0],
            js: vec![8.0, 16.0, 32.0, 64.0],
            floors: vec![16.0, 8.0, 4.0, 2.0],
            ts: vec![0.25, 1.0, 4.0],
            out: PathBuf::from("out"),
            plots: true,
        }
    }
}

const KEYS: &[&str] = &[
    "grid.n",
    "grid.N",
    "grid.L",
    "tq.a",
    "tq.t_min",
    "tq.t_max",
    "tq.rho",
    "family.count",
    "family.seed",
    "family.max_mode",
    "family.mean_zero",
    "experiment.m",
    "experiment.k",
    "experiment.p",
    "experiment.kind",
    "experiment.grisvard_m",
    "experiment.cases",
    "experiment.ls",
    "experiment.js",
    "experiment.floors",
    "experiment.t",
    "output.dir",
    "output.plots",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| err(format!("{key}: cannot parse '{v}'")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',').map(|s| num(key, s.trim())).collect()
}

fn boolean(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(err(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn cases(v: &str) -> Result<Vec<RatioCase>, ConfigError> {
    v.split(',')
        .map(|c| {
            let parts: Vec<&str> = c.trim().split(':').collect();
            if parts.len() != 3 {
                return Err(err(format!("experiment.cases: expected m:a:p, got '{}'", c.trim())));
            }
            Ok(RatioCase {
                m: num("experiment.cases", parts[0])?,
                a: num("experiment.cases", parts[1])?,
                p: num("experiment.cases", parts[2])?,
            })
        })
        .collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parses and validates; later lines override earlier ones.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected key = value", lineno + 1)))?;
            c.set(key.trim(), value.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "grid.n" => self.n = num(key, v)?,
            "grid.N" => self.size = num(key, v)?,
            "grid.L" => self.length = num(key, v)?,
            "tq.a" => self.a = num(key, v)?,
            "tq.t_min" => self.t_min = num(key, v)?,
            "tq.t_max" => self.t_max = if v.is_empty() { None } else { Some(num(key, v)?) },
            "tq.rho" => self.rho = num(key, v)?,
            "family.count" => self.count = num(key, v)?,
            "family.seed" => self.seed = num(key, v)?,
            "family.max_mode" => self.max_mode = if v.is_empty() { None } else { Some(num(key, v)?) },
            "family.mean_zero" => self.mean_zero = boolean(key, v)?,
            "experiment.m" => self.m = num(key, v)?,
            "experiment.k" => self.k = num(key, v)?,
            "experiment.p" => self.p = num(key, v)?,
            "experiment.kind" => {
                self.kind = match v {
                    "gauss" | "gauss-weierstrass" => KernelKind::GaussWeierstrass,
                    "poisson" => KernelKind::Poisson,
                    _ => return Err(err(format!("experiment.kind: expected gauss or poisson, got '{v}'"))),
                }
            }
            "experiment.grisvard_m" => self.grisvard_m = num(key, v)?,
            "experiment.cases" => self.cases = cases(v)?,
            "experiment.ls" => self.ls = list(key, v)?,
            "experiment.js" => self.js = list(key, v)?,
            "experiment.floors" => self.floors = list(key, v)?,
            "experiment.t" => self.ts = list(key, v)?,
            "output.dir" => self.out = PathBuf::from(v),
            "output.plots" => self.plots = boolean(key, v)?,
            _ => return Err(err(format!("unknown key '{key}'; known keys: {}", KEYS.join(", ")))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        GridSpec::new(self.n, self.size, self.length).map_err(|e| err(e.to_string()))?;
        let weight = |a: f64, what: &str| {
            if a > -1.0 && a.is_finite() {
                Ok(())
            } else {
                Err(err(format!("{what} = {a} violates the hypothesis a > -1")))
            }
        };
        weight(self.a, "tq.a")?;
        for c in &self.cases {
            weight(c.a, "experiment.cases a")?;
            if !(c.p >= 1.0) {
                return Err(err(format!("experiment.cases p = {} must be at least 1", c.p)));
            }
            if c.m + 1 > MultiIndex::MAX_ORDER {
                return Err(err(format!("experiment.cases m = {} exceeds the derivative cap", c.m)));
            }
            if !(c.a < c.p * (c.m as f64 + 1.0) - 1.0) {
                return Err(err(format!(
                    "experiment.cases ({}, {}, {}) needs a < p(m+1) - 1",
                    c.m, c.a, c.p
                )));
            }
            if c.p == 1.0 && !(c.a < c.m as f64) {
                return Err(err(format!("experiment.cases ({}, {}, 1) needs a < m", c.m, c.a)));
            }
        }
        if !(self.t_min > 0.0 && self.t_min < 1.0) {
            return Err(err(format!("tq.t_min = {} must lie in (0, 1)", self.t_min)));
        }
        if let Some(t_max) = self.t_max {
            if !(t_max > 1.0) {
                return Err(err(format!("tq.t_max = {t_max} must exceed 1")));
            }
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return Err(err(format!("tq.rho = {} must exceed 1", self.rho)));
        }
        if self.count == 0 {
            return Err(err("family.count must be at least 1"));
        }
        if !(self.p >= 1.0) {
            return Err(err(format!("experiment.p = {} must be at least 1", self.p)));
        }
        if self.m + 1 > MultiIndex::MAX_ORDER || self.grisvard_m + 1 > MultiIndex::MAX_ORDER {
            return Err(err("experiment.m and experiment.grisvard_m must be at most 3"));
        }
        if self.k >= self.m {
            return Err(err(format!("experiment.k = {} needs k < m = {}", self.k, self.m)));
        }
        if self.a > self.m as f64 {
            return Err(err(format!(
                "tq.a = {} needs a <= m = {} for the composite lift",
                self.a, self.m
            )));
        }
        for (key, v, min) in [("experiment.ls", &self.ls, 1.0), ("experiment.js", &self.js, 1.0)] {
            if v.len() < 4 {
                return Err(err(format!("{key} needs at least 4 values for a slope fit")));
            }
            if v.iter().any(|x| !(*x >= min)) {
                return Err(err(format!("{key} values must be at least {min}")));
            }
        }
        if self.floors.len() < 4 || self.floors.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(err("experiment.floors needs at least 4 strictly decreasing values"));
        }
        if self.floors.iter().any(|f| !(*f >= 1.0)) {
            return Err(err(
                "experiment.floors are multiples of the grid step and must be at least 1",
            ));
        }
        if self.ts.is_empty() || self.ts.iter().any(|t| !(*t > 0.0)) {
            return Err(err("experiment.t needs positive times"));
        }
        Ok(())
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec::new(self.n, self.size, self.length).expect("validated grid")
    }

    /// Canonical `key=value` text in fixed key order, the input of the config hash.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let kind = match self.kind {
            KernelKind::GaussWeierstrass => "gauss",
            KernelKind::Poisson => "poisson",
        };
        let cases = self
            .cases
            .iter()
            .map(|c| format!("{}:{}:{}", c.m, c.a, c.p))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(s, "grid.n={}", self.n);
        let _ = writeln!(s, "grid.N={}", self.size);
        let _ = writeln!(s, "grid.L={}", self.length);
        let _ = writeln!(s, "tq.a={}", self.a);
        let _ = writeln!(s, "tq.t_min={}", self.t_min);
        let _ = writeln!(s, "tq.t_max={}", self.t_max.map(|t| t.to_string()).unwrap_or_default());
        let _ = writeln!(s, "tq.rho={}", self.rho);
        let _ = writeln!(s, "family.count={}", self.count);
        let _ = writeln!(s, "family.seed={}", self.seed);
        let _ = writeln!(
            s,
            "family.max_mode={}",
            self.max_mode.map(|t| t.to_string()).unwrap_or_default()
        );
        let _ = writeln!(s, "family.mean_zero={}", self.mean_zero);
        let _ = writeln!(s, "experiment.m={}", self.m);
        let _ = writeln!(s, "experiment.k={}", self.k);
        let _ = writeln!(s, "experiment.p={}", self.p);
        let _ = writeln!(s, "experiment.kind={kind}");
        let _ = writeln!(s, "experiment.grisvard_m={}", self.grisvard_m);
        let _ = writeln!(s, "experiment.cases={cases}");
        let _ = writeln!(s, "experiment.ls={}", fmt_list(&self.ls));
        let _ = writeln!(s, "experiment.js={}", fmt_list(&self.js));
        let _ = writeln!(s, "experiment.floors={}", fmt_list(&self.floors));
        let _ = writeln!(s, "experiment.t={}", fmt_list(&self.ts));
        s
    }
}
