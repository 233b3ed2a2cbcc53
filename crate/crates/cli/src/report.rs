//! Records produced by tasks and their serialization to disk.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::Format;
use crate::svg::Plot;

/// Header of the aggregate `reports.csv`.
pub const CSV_HEADER: &str = "record,report,s,h,lhs,rhs_parts,constant,pass";
pub const AGGREGATE_CSV: &str = "reports.csv";

/// One flat row of the aggregate CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub report: String,
    pub s: f64,
    pub h: f64,
    pub lhs: f64,
    pub rhs_parts: BTreeMap<String, f64>,
    pub constant: f64,
    pub pass: bool,
}

/// Extra per-record CSV written as `<record><suffix>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub suffix: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub name: String,
    pub body: Value,
    pub rows: Vec<ReportRow>,
    pub tables: Vec<Table>,
    pub plot: Option<Plot>,
    /// False when a verification in this record failed.
    pub pass: bool,
}

impl Record {
    pub fn new(name: impl Into<String>, body: Value) -> Self {
        Self {
            name: name.into(),
            body,
            rows: Vec::new(),
            tables: Vec::new(),
            plot: None,
            pass: true,
        }
    }
}

fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "_-.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "record".into()
    } else {
        s
    }
}

/// File stems for `records`, with `_2`, `_3`, ... appended to repeated names.
pub fn unique_names(records: &[Record]) -> Vec<String> {
    let mut used = BTreeSet::new();
    records
        .iter()
        .map(|r| {
            let base = sanitize(&r.name);
            let mut name = base.clone();
            let mut k = 2;
            while used.contains(&name) || name == "reports" {
                name = format!("{base}_{k}");
                k += 1;
            }
            used.insert(name.clone());
            name
        })
        .collect()
}

pub fn aggregate_csv(records: &[Record], names: &[String]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (rec, name) in records.iter().zip(names) {
        for row in &rec.rows {
            let parts: Vec<String> = row.rhs_parts.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!(
                "{name},{},{},{},{},{},{},{}\n",
                row.report,
                row.s,
                row.h,
                row.lhs,
                parts.join(";"),
                row.constant,
                row.pass
            ));
        }
    }
    out
}

/// Writes one JSON object per record, the aggregate CSV plus per-record
/// tables, and SVG plots, according to `formats`. Returns the written paths
/// in order.
pub fn emit_report(records: &[Record], formats: &[Format], dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let names = unique_names(records);
    let mut written = Vec::new();
    let mut put = |file: String, contents: &str| -> io::Result<()> {
        let path = dir.join(file);
        fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };
    if formats.contains(&Format::Json) {
        for (rec, name) in records.iter().zip(&names) {
            let mut obj = serde_json::Map::new();
            obj.insert("name".into(), Value::String(name.clone()));
            obj.insert("pass".into(), Value::Bool(rec.pass));
            obj.insert("record".into(), rec.body.clone());
            let mut text = serde_json::to_string_pretty(&Value::Object(obj)).map_err(io::Error::other)?;
            text.push('\n');
            put(format!("{name}.json"), &text)?;
        }
    }
    if formats.contains(&Format::Csv) {
        put(AGGREGATE_CSV.into(), &aggregate_csv(records, &names))?;
        for (rec, name) in records.iter().zip(&names) {
            for t in &rec.tables {
                put(format!("{name}{}.csv", t.suffix), &t.to_csv())?;
            }
        }
    }
    if formats.contains(&Format::Svg) {
        for (rec, name) in records.iter().zip(&names) {
            if let Some(plot) = &rec.plot {
                put(format!("{name}.svg"), &plot.render())?;
            }
        }
    }
    Ok(written)
}
