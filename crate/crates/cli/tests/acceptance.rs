//! Acceptance criteria 1 to 11. Each prints one PASS/FAIL line; the test fails if any does.

use std::io::Write;
use std::process::Command;

use serde_json::Value;
use tracelab_cli::config::{ExperimentConfig, RatioCase};
use tracelab_cli::report::Report;
use tracelab_cli::suites;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).expect("acceptance config is valid")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or(f64::NAN)
}

fn rows<'a>(r: &'a Report, table: &'a str) -> Vec<&'a Value> {
    r.table(table).collect()
}

fn find<'a>(r: &'a Report, table: &'a str, key: &str, value: &str) -> Result<&'a Value, String> {
    r.table(table)
        .find(|v| v[key] == value)
        .ok_or_else(|| format!("no {table} row with {key} = {value}"))
}

fn failures(r: &Report) -> String {
    r.failures
        .iter()
        .take(3)
        .map(|f| f.what.clone())
        .collect::<Vec<_>>()
        .join("; ")
}

fn c1_identities() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (n, size) in [(1, 1024), (2, 256)] {
        let r = suites::identities(&cfg(&format!("grid.n = {n}\ngrid.N = {size}\n"))).map_err(|e| e.to_string())?;
        let checked = rows(&r, "identity").len();
        let skipped = rows(&r, "identity_skipped").len();
        ok &= r.passed() && checked > 0;
        detail.push(format!(
            "n={n} N={size}: {checked} residuals, {skipped} below the conditioning floor"
        ));
        if !r.passed() {
            detail.push(failures(&r));
        }
    }
    Ok((ok, detail.join(", ")))
}

fn c2_lemma() -> Outcome {
    let r = suites::lemma_integrals(&ExperimentConfig::default()).map_err(|e| e.to_string())?;
    let x1 = r
        .table("lemma")
        .find(|v| v["case"] == "n1_alpha1_b0" && num(v, "x") == 1.0)
        .ok_or("missing x = 1 row")?;
    let err = num(x1, "error");
    let rejected = find(&r, "lemma_rejection", "case", "n1_alpha0_b0")?["rejected"] == true;
    let ok = r.passed() && err <= 1e-6 && rejected;
    Ok((ok, format!("|value - 1/(2 sqrt pi)| = {err:.2e}, rejection {rejected}")))
}

fn ratio_gates(r: &Report) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for s in r.table("ratio_summary") {
        let ratio = num(s, "constant_over_reference");
        let dil = num(s, "max_dilation_drift");
        let refn = num(s, "max_refinement_drift");
        let finite = s["all_finite"] == true;
        let pass = finite && (0.5..=2.0).contains(&ratio) && dil <= 0.1 && refn <= 0.1;
        ok &= pass;
        parts.push(format!(
            "(m,a,p)=({},{},{}) max/ref {ratio:.3} dil {dil:.3} ref {refn:.4}",
            s["m"], s["a"], s["p"]
        ));
    }
    ok &= !parts.is_empty();
    (ok, parts.join("; "))
}

fn ratio_config() -> ExperimentConfig {
    cfg("grid.N = 2048\ngrid.L = 64\nfamily.count = 10\n")
}

fn c3_main_estimate() -> Outcome {
    let c = ratio_config();
    let mut r = Report::new("c3");
    for (m, a) in [(1, 0.0), (2, 0.0), (2, 0.5), (1, -0.5)] {
        suites::ratio_case(&c, &RatioCase { m, a, p: 1.0 }, &mut r).map_err(|e| e.to_string())?;
    }
    Ok(ratio_gates(&r))
}

fn c4_p_estimate() -> Outcome {
    let c = ratio_config();
    let mut r = Report::new("c4");
    suites::ratio_case(&c, &RatioCase { m: 0, a: 0.0, p: 2.0 }, &mut r).map_err(|e| e.to_string())?;
    Ok(ratio_gates(&r))
}

fn c5_trace_recovery() -> Outcome {
    let c = ExperimentConfig::default();
    let mut r = Report::new("c5");
    suites::trace_recovery(&c, &mut r).map_err(|e| e.to_string())?;
    let fits = rows(&r, "trace_fit");
    let rate = |kind: &str| {
        fits.iter()
            .find(|v| v["function"] == "single_mode" && v["kind"] == kind)
            .map(|v| num(v, "rate"))
            .unwrap_or(f64::NAN)
    };
    let (g, p) = (rate("gauss"), rate("poisson"));
    let worst = fits
        .iter()
        .filter(|v| v["function"] != "single_mode")
        .map(|v| num(v, "final_relative"))
        .fold(0.0, f64::max);
    let ok = (g - 2.0).abs() <= 0.1 && (p - 1.0).abs() <= 0.1 && worst < 1e-3;
    Ok((
        ok,
        format!("gauss rate {g:.4}, poisson rate {p:.4}, family error at t=2^-10 {worst:.2e}"),
    ))
}

fn c6_counterexamples() -> Outcome {
    let c = cfg("grid.N = 16384\n");
    let r = suites::counterexample(&c).map_err(|e| e.to_string())?;
    let floors = r.table("divergence").filter(|v| v["function"] == "indicator").count();
    let ind = find(&r, "divergence_fit", "function", "indicator")?;
    let psi = find(&r, "divergence_fit", "function", "psi_k2_derivative")?;
    let diverges = |v: &Value| num(v, "slope") > 0.0 && num(v, "r2") >= 0.99;
    let controls: Vec<&Value> = r
        .table("divergence_fit")
        .filter(|v| v["expect_divergence"] == false)
        .collect();
    let worst = controls
        .iter()
        .map(|v| num(v, "relative_slope").abs())
        .fold(0.0, f64::max);
    let ok = floors >= 4 && diverges(ind) && diverges(psi) && !controls.is_empty() && worst <= 0.05;
    Ok((
        ok,
        format!(
            "indicator slope {:.3} R2 {:.4}, psi_k2 slope {:.3} R2 {:.4}, controls max |slope|/value {worst:.4}",
            num(ind, "slope"),
            num(ind, "r2"),
            num(psi, "slope"),
            num(psi, "r2")
        ),
    ))
}

fn c7_liftings() -> Outcome {
    let c = cfg("grid.N = 256\nexperiment.m = 2\ntq.a = 0\nexperiment.k = 1\n");
    let r = suites::lift(&c).map_err(|e| e.to_string())?;
    let composite: Vec<&Value> = r
        .table("lift_trace")
        .filter(|v| v["construction"] == "composite")
        .collect();
    let comp_worst = composite.iter().map(|v| num(v, "relative")).fold(0.0, f64::max);
    let fit = |construction: &str, bucket: &str| {
        r.table("decay_fit")
            .find(|v| v["construction"] == construction && v["bucket"] == bucket)
            .map(|v| num(v, "fitted_slope"))
            .unwrap_or(f64::NAN)
    };
    let mir = fit("mironescu", "beta_positive");
    let normal: Vec<&Value> = r
        .table("decay_fit")
        .filter(|v| v["construction"] == "normal_trace" && v["expected_slope"].is_number())
        .collect();
    let normal_ok = !normal.is_empty()
        && normal
            .iter()
            .all(|v| (num(v, "fitted_slope") - num(v, "expected_slope")).abs() <= 0.1);
    let gris = fit("grisvard", "i_1");
    let g = r.table("grisvard_distance").next().ok_or("missing grisvard row")?;
    let dist = num(g, "relative_distance");
    let ok = composite.len() == 3
        && comp_worst <= 1e-2
        && (mir + 1.0).abs() <= 0.1
        && normal_ok
        && (gris + 1.0).abs() <= 0.15
        && dist < 0.01
        && r.passed();
    Ok((
        ok,
        format!(
            "composite traces max rel {comp_worst:.2e}, mironescu slope {mir:.4}, normal-trace slopes {}, grisvard i_1 slope {gris:.4}, distance at j={} {dist:.5}",
            if normal_ok { "ok" } else { "off" },
            g["j"]
        ),
    ))
}

fn c8_embedding() -> Outcome {
    let r = suites::embedding(&ExperimentConfig::default()).map_err(|e| e.to_string())?;
    let violations: u64 = r
        .table("embedding")
        .map(|v| v["violations"].as_u64().unwrap_or(u64::MAX))
        .sum();
    let z = r.table("zygmund_summary").next().ok_or("missing zygmund summary")?;
    let drift = num(z, "refinement_drift");
    let ok = violations == 0 && drift <= 0.1 && num(z, "constant").is_finite();
    Ok((
        ok,
        format!(
            "{violations} violations, zygmund constant {:.4} drift {drift:.2e}",
            num(z, "constant")
        ),
    ))
}

fn c9_cross_term() -> Outcome {
    let c = ExperimentConfig::default();
    let mut r = Report::new("c9");
    suites::cross_terms(&c, &c.spec(), &mut r).map_err(|e| e.to_string())?;
    let s = r.table("cross_term_summary").next().ok_or("missing summary")?;
    let single = num(s, "single_mode_ratio");
    let drift = num(s, "refinement_drift");
    let ok = (single - 1.0).abs() <= 1e-8 && drift <= 0.1;
    Ok((
        ok,
        format!(
            "single mode {single:.12}, family max {:.4}, drift {drift:.2e}",
            num(s, "constant")
        ),
    ))
}

fn c10_riesz() -> Outcome {
    // PV truncation error is first order in eps times the frequency content, so the
    // grid must resolve the band limit at eps = 2 dx.
    let c = cfg("grid.N = 4096\nfamily.max_mode = 32\n");
    let r = suites::riesz(&c).map_err(|e| e.to_string())?;
    let s = r.table("riesz_summary").next().ok_or("missing summary")?;
    let drift = num(s, "refinement_drift");
    let pv = num(s, "pv_max_relative_l1");
    let ok = drift <= 0.2 && pv <= 0.05 && r.table("riesz_pv").count() > 0;
    Ok((
        ok,
        format!(
            "family max ratio {:.4}, drift {drift:.2e}, PV max rel L1 {pv:.4}",
            num(s, "constant")
        ),
    ))
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("small.cfg");
    std::fs::write(
        &config,
        "grid.N = 256\nfamily.count = 4\nexperiment.cases = 1:0:1, 0:0:2\noutput.plots = false\n",
    )
    .map_err(|e| e.to_string())?;
    let mut docs = Vec::new();
    for threads in [1, 4] {
        let out = dir.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_tracelab"))
            .arg("report")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .arg("--seed")
            .arg("7")
            .arg("--threads")
            .arg(threads.to_string())
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Ok((
                false,
                format!("run with {threads} threads exited {:?}", status.status.code()),
            ));
        }
        let text = std::fs::read_to_string(out.join("report.json")).map_err(|e| e.to_string())?;
        docs.push(text);
    }
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.contains("\"timestamp\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let hash = |s: &str| -> String {
        let v: Value = serde_json::from_str(s).unwrap_or(Value::Null);
        v["metadata"]["payload_sha256"].as_str().unwrap_or_default().to_string()
    };
    let same = strip(&docs[0]) == strip(&docs[1]);
    let h = hash(&docs[0]);
    let ok = same && !h.is_empty() && h == hash(&docs[1]);
    Ok((ok, format!("threads 1 vs 4: payload sha256 {}", &h[..h.len().min(16)])))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 11] = [
        ("exact identities", c1_identities),
        ("heat integral oracle", c2_lemma),
        ("main estimate ratios", c3_main_estimate),
        ("p-estimate ratios", c4_p_estimate),
        ("trace recovery", c5_trace_recovery),
        ("counterexamples", c6_counterexamples),
        ("liftings", c7_liftings),
        ("embedding", c8_embedding),
        ("cross term", c9_cross_term),
        ("riesz boundedness", c10_riesz),
        ("determinism", c11_determinism),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout();
    let _ = writeln!(out);
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let _ = writeln!(
            out,
            "criterion {:>2} {:<22} {}  {detail}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
