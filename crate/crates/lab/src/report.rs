//! Structured experiment reports: one JSON document plus flat CSV tables.
//!
//! Reports contain no timestamps or timings, so identical inputs give
//! byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use morrey_core::geometry::Cube;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;

pub const SCHEMA_VERSION: &str = "morrey-lab-report/1";

/// JSON number, or a string for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn cube_value(q: &Cube) -> Value {
    json!({ "center": q.center(), "side": q.side() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `measured ≤ reference·(1 + tolerance)`.
    Le,
    /// `measured ≥ reference·(1 − tolerance)`.
    Ge,
    /// `|measured − reference| ≤ tolerance·|reference|` (exact when `tolerance = 0`).
    Eq,
    /// `measured < reference` strictly.
    Lt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: Value,
    pub reference: Value,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, reference: f64, tolerance: f64) -> Self {
        let passed = match relation {
            Relation::Le => measured <= reference + tolerance * reference.abs(),
            Relation::Ge => measured >= reference - tolerance * reference.abs(),
            Relation::Eq => (measured - reference).abs() <= tolerance * reference.abs() || measured == reference,
            Relation::Lt => measured < reference,
        };
        Check {
            name: name.into(),
            measured: num(measured),
            reference: num(reference),
            tolerance,
            relation,
            passed,
        }
    }

    /// Boolean condition, recorded as `measured = 1` against `reference = 1`.
    pub fn flag(name: impl Into<String>, holds: bool) -> Self {
        Check::new(name, if holds { 1.0 } else { 0.0 }, Relation::Eq, 1.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Formats a float with the shortest round-trip representation.
pub fn cell(x: f64) -> String {
    x.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub experiment: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, Value>,
    pub measured: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub passed: bool,
}

impl Report {
    pub fn new(experiment: &str, seed: u64) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            seed,
            parameters: BTreeMap::new(),
            measured: BTreeMap::new(),
            checks: Vec::new(),
            tables: Vec::new(),
            passed: true,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }

    pub fn measure(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.measured.insert(key.to_string(), serde_json::to_value(value).expect("serializable measurement"));
        self
    }

    pub fn measure_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.measured.insert(key.to_string(), num(value));
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        self.passed &= check.passed;
        self.checks.push(check);
        self
    }

    pub fn table(&mut self, table: Table) -> &mut Self {
        self.tables.push(table);
        self
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `<dir>/<experiment>.json` and one `<experiment>_<table>.csv` per table.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json_path = dir.join(format!("{}.json", self.experiment));
        fs::write(&json_path, self.to_json()?)?;
        written.push(json_path);
        for t in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.experiment, t.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&t.columns)?;
            for row in &t.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Check::new("a", 1.0, Relation::Le, 1.0, 0.0).passed);
        assert!(!Check::new("a", 1.0 + 1e-8, Relation::Le, 1.0, 1e-9).passed);
        assert!(Check::new("a", 0.5, Relation::Eq, 0.5, 0.0).passed);
        assert!(!Check::new("a", 2.0, Relation::Lt, 2.0, 0.0).passed);
        assert!(Check::new("a", 0.0, Relation::Eq, 0.0, 0.0).passed);
        assert!(!Check::flag("f", false).passed);
    }

    #[test]
    fn non_finite_values_serialize() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(1.5), json!(1.5));
    }

    #[test]
    fn failing_check_fails_report() {
        let mut r = Report::new("x", 0);
        r.check(Check::flag("ok", true));
        assert!(r.passed);
        r.check(Check::flag("bad", false));
        assert!(!r.passed);
        assert_eq!(r.failed_checks().count(), 1);
    }
}
