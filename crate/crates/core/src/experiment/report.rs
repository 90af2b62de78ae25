use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// One table cell.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Num(v) => s.serialize_f64(*v),
            Cell::Text(v) => s.serialize_str(v),
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Floats are written with 17 significant digits.
pub fn format_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// Exponent label for column and verdict names: `2`, `1.5`, `inf`.
pub fn format_q(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        format!("{q}")
    }
}

impl Cell {
    pub fn to_text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_num(*v),
            Cell::Text(v) => v.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    /// Values of a numeric column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64().unwrap_or(f64::NAN)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        }
    }
}

/// A measured value judged against the threshold it cites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub detail: String,
}

impl Verdict {
    pub fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= threshold,
            value,
            comparison: Comparison::AtMost,
            threshold,
            detail: detail.into(),
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: value >= threshold,
            value,
            comparison: Comparison::AtLeast,
            threshold,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    /// Set when the pipeline stopped early; holds the error.
    pub partial: Option<String>,
    /// Named structured results, each also written as `<name>.json`.
    pub attachments: BTreeMap<String, serde_json::Value>,
    /// Wall-clock seconds per phase; written only to `timing.json`.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment.name().to_string(),
            config: config.resolved(),
            tables: Vec::new(),
            verdicts: Vec::new(),
            partial: None,
            attachments: BTreeMap::new(),
            timings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.partial.is_none() && self.verdicts.iter().all(|v| v.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn timing(&self, name: &str) -> Option<f64> {
        self.timings.iter().find(|t| t.0 == name).map(|t| t.1)
    }

    pub fn total_seconds(&self) -> f64 {
        self.timings.iter().map(|t| t.1).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// JSON formatter that pretty-prints and writes floats with 17 significant digits.
struct SciFormatter(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        write!(w, "{v:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with 17-digit floats; non-finite floats become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(Default::default()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("cannot write {}: {e}", path.display())))
    })
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// Writes the report into `dir` and returns the files written.
///
/// CSV: one `<table>.csv` per table (header only when empty), `verdicts.csv`, the resolved
/// config as `config.toml` and attachments as JSON. JSON: `report.json` plus attachments.
/// Wall-clock timings go to `timing.json` in either case, so the other files are
/// byte-identical across reruns.
pub fn emit_report(report: &ExperimentReport, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("cannot create {}: {e}", dir.display())))
    })?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    match format {
        ReportFormat::Csv => {
            for t in &report.tables {
                let bytes = csv_bytes(&t.columns, t.rows.iter().map(|r| r.iter().map(Cell::to_text).collect()))?;
                put(&format!("{}.csv", t.name), bytes)?;
            }
            let header: Vec<String> = ["name", "passed", "value", "comparison", "threshold", "detail"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let rows = report.verdicts.iter().map(|v| {
                vec![
                    v.name.clone(),
                    v.passed.to_string(),
                    format_num(v.value),
                    v.comparison.symbol().to_string(),
                    format_num(v.threshold),
                    v.detail.clone(),
                ]
            });
            put("verdicts.csv", csv_bytes(&header, rows)?)?;
            let mut config = report.config.to_toml_string()?;
            if let Some(p) = &report.partial {
                config.push_str(&format!("\n# partial: {}\n", p.replace('\n', " ")));
            }
            put("config.toml", config.into_bytes())?;
        }
        ReportFormat::Json => put("report.json", to_json_string(report)?.into_bytes())?,
    }
    for (name, value) in &report.attachments {
        put(&format!("{name}.json"), to_json_string(value)?.into_bytes())?;
    }
    let timing = TimingFile {
        experiment: &report.experiment,
        total_seconds: report.total_seconds(),
        phases: report.timings.iter().map(|(phase, seconds)| Phase { phase, seconds: *seconds }).collect(),
    };
    put("timing.json", to_json_string(&timing)?.into_bytes())?;
    Ok(written)
}

#[derive(Serialize)]
struct Phase<'a> {
    phase: &'a str,
    seconds: f64,
}

#[derive(Serialize)]
struct TimingFile<'a> {
    experiment: &'a str,
    total_seconds: f64,
    phases: Vec<Phase<'a>>,
}
