//! Machine-readable experiment reports: a JSON summary with sorted keys plus
//! CSV tables, formatted so identical inputs and seeds reproduce identical
//! bytes. Wall time is written to a separate timing file so the reports
//! themselves stay reproducible.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// Table/summary output selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// JSON summary plus one CSV file per table.
    Csv,
    /// Single JSON summary with the tables embedded.
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!(
                "unknown report format `{other}` (expected csv or json)"
            ))),
        }
    }
}

/// One named check with its threshold, comparison, and outcome.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// True when smaller is better (`value < threshold` passes).
    pub upper_bound: bool,
    pub pass: bool,
}

impl Check {
    pub fn upper(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            upper_bound: true,
            pass: value < threshold,
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            value: if pass { 1.0 } else { 0.0 },
            threshold: 1.0,
            upper_bound: false,
            pass,
        }
    }
}

/// A CSV table: header plus formatted rows.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Everything one experiment run produces.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub experiment: String,
    pub seed: u64,
    pub parameters: Value,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub wall_time_s: f64,
}

impl ReportBundle {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Fixed scientific formatting with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn checks_json(checks: &[Check]) -> Value {
    Value::Array(
        checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "value": format_float(c.value),
                    "threshold": format_float(c.threshold),
                    "comparison": if c.upper_bound { "value < threshold" } else { "flag" },
                    "pass": c.pass,
                })
            })
            .collect(),
    )
}

fn table_json(table: &Table) -> Value {
    json!({
        "columns": table.columns,
        "rows": table.rows,
    })
}

/// Write the bundle under `out_dir`; returns the paths written.
///
/// The JSON summary always lands in `summary.json`; tables go to
/// `<name>.csv` files (csv format) or inside the summary (json format).
/// Wall time goes to `timing.txt`, kept out of the reproducible outputs.
pub fn emit_report(
    bundle: &ReportBundle,
    out_dir: &Path,
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let mut summary = Map::new();
    summary.insert(
        "experiment".into(),
        Value::String(bundle.experiment.clone()),
    );
    summary.insert("seed".into(), json!(bundle.seed));
    summary.insert("parameters".into(), bundle.parameters.clone());
    let metrics: Map<String, Value> = bundle
        .metrics
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(format_float(*v))))
        .collect();
    summary.insert("metrics".into(), Value::Object(metrics));
    summary.insert("checks".into(), checks_json(&bundle.checks));
    summary.insert("all_pass".into(), Value::Bool(bundle.all_pass()));
    if format == ReportFormat::Json {
        let tables: Map<String, Value> = bundle
            .tables
            .iter()
            .map(|t| (t.name.clone(), table_json(t)))
            .collect();
        summary.insert("tables".into(), Value::Object(tables));
    }

    let summary_path = out_dir.join("summary.json");
    let mut body = serde_json::to_string_pretty(&Value::Object(summary))
        .map_err(|e| Error::Numerical(format!("summary serialization failed: {e}")))?;
    body.push('\n');
    fs::write(&summary_path, body)?;
    written.push(summary_path);

    if format == ReportFormat::Csv {
        for table in &bundle.tables {
            let path = out_dir.join(format!("{}.csv", table.name));
            fs::write(&path, table.to_csv())?;
            written.push(path);
        }
    }

    let timing = out_dir.join("timing.txt");
    fs::write(&timing, format!("wall_time_s={:.6}\n", bundle.wall_time_s))?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_fixed_width() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(-0.5), "-5.0000000000000000e-1");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push_row(vec!["1".into(), "2".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,2\n");
    }

    #[test]
    fn summary_roundtrips_and_is_stable() {
        let mut metrics = BTreeMap::new();
        metrics.insert("dev".to_string(), 1.25e-9);
        let bundle = ReportBundle {
            experiment: "demo".into(),
            seed: 7,
            parameters: json!({"x": 1}),
            metrics,
            checks: vec![Check::upper("dev_below", 1.25e-9, 1e-6)],
            tables: vec![],
            wall_time_s: 0.01,
        };
        let dir = std::env::temp_dir().join(format!("report_test_{}", std::process::id()));
        let w1 = emit_report(&bundle, &dir, ReportFormat::Json).unwrap();
        let body1 = std::fs::read_to_string(&w1[0]).unwrap();
        let parsed: Value = serde_json::from_str(&body1).unwrap();
        assert_eq!(parsed["experiment"], "demo");
        let w2 = emit_report(&bundle, &dir, ReportFormat::Json).unwrap();
        let body2 = std::fs::read_to_string(&w2[0]).unwrap();
        assert_eq!(body1, body2);
        std::fs::remove_dir_all(&dir).ok();
    }
}
