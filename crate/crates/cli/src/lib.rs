//! Experiment runner behind the `tracelab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod plot;
pub mod report;
pub mod suites;

use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use config::{ConfigError, ExperimentConfig};
pub use report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    Identities,
    LemmaIntegrals,
    TraceRatios,
    Lift,
    Riesz,
    Counterexample,
    Embedding,
    Report,
}

#[derive(Debug, Parser)]
#[command(
    name = "tracelab",
    version,
    about = "Trace and extension experiments on periodic grids"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub verb: Verb,
    /// Key = value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overrides output.dir.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Family seed, overrides family.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub fn run_verb(verb: Verb, cfg: &ExperimentConfig) -> tracelab::Result<Report> {
    match verb {
        Verb::Identities => suites::identities(cfg),
        Verb::LemmaIntegrals => suites::lemma_integrals(cfg),
        Verb::TraceRatios => suites::trace_ratios(cfg),
        Verb::Lift => suites::lift(cfg),
        Verb::Riesz => suites::riesz(cfg),
        Verb::Counterexample => suites::counterexample(cfg),
        Verb::Embedding => suites::embedding(cfg),
        Verb::Report => suites::full_report(cfg),
    }
}

/// Reads the config and applies the flag overrides.
pub fn load_config(cli: &Cli) -> Result<ExperimentConfig, (i32, String)> {
    let text = match &cli.config {
        Some(p) => fs::read_to_string(p).map_err(|e| (EXIT_IO, format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = ExperimentConfig::parse(&text).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn exit_for(e: &tracelab::Error) -> i32 {
    use tracelab::Error::*;
    match e {
        InvalidGrid(_) | OrderCap(_) | InvalidParameter(_) | Hypothesis(_) | Resolution(_) => EXIT_CONFIG,
        GridMismatch | NonFinite(_) => EXIT_FAILED,
    }
}

/// Runs one verb end to end and returns the exit status.
pub fn execute(cli: &Cli) -> i32 {
    let cfg = match load_config(cli) {
        Ok(c) => c,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let rep = match run_verb(cli.verb, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    let stamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let path = match rep.write(&cfg, &cfg.out, &stamp) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: writing {}: {e}", cfg.out.display());
            return EXIT_IO;
        }
    };
    println!("wrote {} ({} rows)", path.display(), rep.rows().len());
    if cfg.plots && plot::has_plottable(&rep) {
        match plot::plot(&rep, &cfg.out) {
            Ok(files) => println!("wrote {} plots", files.len()),
            Err(e) => {
                eprintln!("error: plotting: {e}");
                return EXIT_IO;
            }
        }
    }
    for f in &rep.failures {
        eprintln!("FAIL [{}] {}", f.table, f.what);
    }
    if rep.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
