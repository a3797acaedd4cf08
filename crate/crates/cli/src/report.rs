//! Row collection, CSV/JSON output and the payload hash.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// A hard check that failed; turns the exit status to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub table: String,
    pub what: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub experiment: String,
    rows: Vec<Value>,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.into(),
            ..Default::default()
        }
    }

    /// Appends a row tagged with its table; field order follows the struct.
    pub fn push<T: Serialize>(&mut self, table: &str, row: &T) {
        let mut obj = Map::new();
        obj.insert("table".into(), Value::String(table.into()));
        match serde_json::to_value(row).expect("rows serialize") {
            Value::Object(fields) => obj.extend(fields),
            other => {
                obj.insert("value".into(), other);
            }
        }
        self.rows.push(Value::Object(obj));
    }

    /// Records a hard check.
    pub fn require(&mut self, table: &str, pass: bool, what: impl Into<String>) {
        if !pass {
            self.failures.push(Failure {
                table: table.into(),
                what: what.into(),
            });
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.rows.extend(other.rows);
        self.failures.extend(other.failures);
    }

    pub fn rows(&self) -> &[Value] {
        &self.rows
    }

    pub fn table<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Value> + 'a {
        self.rows.iter().filter(move |r| r["table"] == name)
    }

    pub fn tables(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.rows {
            let t = r["table"].as_str().unwrap_or_default().to_string();
            if !names.contains(&t) {
                names.push(t);
            }
        }
        names
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// The hash-covered part of the JSON document.
    fn payload(&self, config: &ExperimentConfig) -> Value {
        json!({
            "experiment": self.experiment,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": config.seed,
            "config_hash": hex::encode(Sha256::digest(config.canonical().as_bytes())),
            "failures": self.failures,
            "rows": self.rows,
        })
    }

    pub fn payload_hash(&self, config: &ExperimentConfig) -> String {
        let bytes = serde_json::to_vec(&self.payload(config)).expect("payload serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// `{metadata, rows}` with the timestamp last in the metadata.
    pub fn to_json(&self, config: &ExperimentConfig, timestamp: &str) -> String {
        let payload = self.payload(config);
        let metadata = json!({
            "experiment": payload["experiment"],
            "version": payload["version"],
            "seed": payload["seed"],
            "config_hash": payload["config_hash"],
            "payload_sha256": self.payload_hash(config),
            "failures": payload["failures"],
            "timestamp": timestamp,
        });
        let doc = json!({ "metadata": metadata, "rows": payload["rows"] });
        serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
    }

    /// One CSV per table, header from the first row of the table.
    pub fn write_csv(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for name in self.tables() {
            let path = dir.join(format!("{name}.csv"));
            let mut w = csv::Writer::from_path(&path)?;
            let mut header: Option<Vec<String>> = None;
            for row in self.table(&name) {
                let obj = row.as_object().expect("rows are objects");
                let keys: Vec<String> = obj.keys().filter(|k| *k != "table").cloned().collect();
                if header.is_none() {
                    w.write_record(&keys)?;
                    header = Some(keys.clone());
                }
                let cols = header.as_ref().expect("header written");
                w.write_record(cols.iter().map(|k| cell(obj.get(k))))?;
            }
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn write(&self, config: &ExperimentConfig, dir: &Path, timestamp: &str) -> io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.experiment));
        fs::write(&path, self.to_json(config, timestamp))?;
        self.write_csv(dir)?;
        Ok(path)
    }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}
