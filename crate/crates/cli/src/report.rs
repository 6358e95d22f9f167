//! Experiment outcomes and their on-disk form.
//!
//! Each run writes `<out>/<experiment>/summary.json`, one CSV per table,
//! and `timings.csv`. Everything except the timings file is a pure function
//! of the config, so reruns produce byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

/// One asserted check. `detail` carries what is needed to rerun a failure.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len(), "table {}", self.name);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| csv_cell(c)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Column index by name.
    pub fn col(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

/// Timing sample kept apart from the reproducible outputs.
#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub label: String,
    pub seconds: f64,
}

/// Everything one experiment produced.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub experiment: String,
    /// Pass thresholds and other settings the checks used.
    pub thresholds: BTreeMap<String, Value>,
    pub summary: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

impl Outcome {
    pub fn new(experiment: &str) -> Self {
        Outcome {
            experiment: experiment.into(),
            thresholds: BTreeMap::new(),
            summary: BTreeMap::new(),
            checks: Vec::new(),
            tables: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn threshold(&mut self, key: &str, v: impl Serialize) {
        self.thresholds.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn summarize(&mut self, key: &str, v: impl Serialize) {
        self.summary.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self, config: &Value) -> String {
        let mut doc = serde_json::to_value(self).expect("serializable");
        let obj = doc.as_object_mut().expect("object");
        obj.insert("passed".into(), Value::Bool(self.passed()));
        obj.insert("config".into(), config.clone());
        obj.insert(
            "tables".into(),
            Value::Array(self.tables.iter().map(|t| Value::String(format!("{}.csv", t.name))).collect()),
        );
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    /// Writes the summary, tables and timings under `dir`; returns the paths.
    pub fn write(&self, dir: &Path, config: &Value) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        let summary = dir.join("summary.json");
        fs::write(&summary, self.to_json(config))
            .with_context(|| format!("writing {}", summary.display()))?;
        written.push(summary);
        for t in &self.tables {
            let p = dir.join(format!("{}.csv", t.name));
            let mut buf = Vec::new();
            t.write_csv(&mut buf)?;
            fs::write(&p, buf).with_context(|| format!("writing {}", p.display()))?;
            written.push(p);
        }
        let p = dir.join("timings.csv");
        let mut buf = String::from("label,seconds\n");
        for t in &self.timings {
            buf.push_str(&format!("{},{}\n", csv_cell(&t.label), t.seconds));
        }
        fs::write(&p, buf).with_context(|| format!("writing {}", p.display()))?;
        written.push(p);
        Ok(written)
    }
}

/// Shortest round-trip rendering used for every numeric CSV cell.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `|a - b| / |b|`, or `|a|` when `b` is zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_cells_with_commas() {
        let mut t = Table::new("t", &["norm", "v"]);
        t.push(vec!["rect:2,1".into(), num(0.5)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "norm,v\n\"rect:2,1\",0.5\n");
    }

    #[test]
    fn outcome_passes_only_when_every_check_does() {
        let mut o = Outcome::new("x");
        assert!(o.passed());
        o.check("a", true, "");
        o.check("b", false, "node 3");
        assert!(!o.passed());
        let json = o.to_json(&Value::Null);
        assert!(json.contains("\"passed\": false"));
    }

    #[test]
    fn relative_error_handles_zero_reference() {
        assert!((rel_err(4.1, 4.0) - 0.025).abs() < 1e-12);
        assert_eq!(rel_err(0.2, 0.0), 0.2);
    }
}
