//! Experiment reports and their CSV / JSON forms.
//!
//! The CSV columns are fixed:
//!
//! ```text
//! dataset,feature_mode,method,acc,precision,recall,f1,fpr,fnr,auc_eq10,flips,restored,seconds
//! ```
//!
//! Metrics are stored as fractions and written with six decimals. An undefined
//! metric, a count that does not apply to the method, or a failed row leaves
//! its cell empty. JSON carries the same cells keyed by column name, plus an
//! `error` key on failed rows and an `environment` stamp.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use clap::ValueEnum;
use lfd_core::metrics::MetricRow;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{FeatureMode, Method};
use crate::{Error, Result};

pub const COLUMNS: [&str; 13] = [
    "dataset",
    "feature_mode",
    "method",
    "acc",
    "precision",
    "recall",
    "f1",
    "fpr",
    "fnr",
    "auc_eq10",
    "flips",
    "restored",
    "seconds",
];

const FLOAT_COLUMNS: std::ops::Range<usize> = 3..10;
const SECONDS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
    /// Human-readable table with metrics in percent.
    Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub feature_mode: FeatureMode,
    pub method: Method,
    pub metrics: MetricRow,
    /// Rows flipped by the attack; empty for the clean baseline.
    pub flips: Option<usize>,
    /// Flipped rows whose true label a defense brought back.
    pub restored: Option<usize>,
    /// Wall clock of the method's own stage: clean training for `none`, the
    /// attack for `sclfa`, label correction for a defense.
    pub seconds: Option<f64>,
    pub error: Option<String>,
}

impl ReportRow {
    pub fn failed(dataset: &str, feature_mode: FeatureMode, method: Method, reason: impl Into<String>) -> Self {
        Self {
            dataset: dataset.into(),
            feature_mode,
            method,
            metrics: MetricRow::default(),
            flips: None,
            restored: None,
            seconds: None,
            error: Some(reason.into()),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn accuracy(&self) -> Option<f64> {
        self.metrics.accuracy
    }

    fn metric_values(&self) -> [Option<f64>; 7] {
        let m = &self.metrics;
        [m.accuracy, m.precision, m.recall, m.f1, m.fpr, m.fnr, m.auc]
    }

    pub fn cells(&self) -> Vec<String> {
        let mut cells = vec![
            self.dataset.clone(),
            self.feature_mode.to_string(),
            self.method.to_string(),
        ];
        cells.extend(self.metric_values().iter().map(|v| v.map(fmt6).unwrap_or_default()));
        cells.push(self.flips.map(|v| v.to_string()).unwrap_or_default());
        cells.push(self.restored.map(|v| v.to_string()).unwrap_or_default());
        cells.push(self.seconds.map(fmt6).unwrap_or_default());
        cells
    }

    pub fn from_cells<S: AsRef<str>>(cells: &[S]) -> Result<Self> {
        if cells.len() != COLUMNS.len() {
            return Err(Error::Report(format!(
                "expected {} cells, found {}",
                COLUMNS.len(),
                cells.len()
            )));
        }
        let cell = |i: usize| cells[i].as_ref();
        let float = |i: usize| -> Result<Option<f64>> {
            match cell(i) {
                "" => Ok(None),
                s => s
                    .parse()
                    .map(Some)
                    .map_err(|_| Error::Report(format!("{}: `{s}` is not a number", COLUMNS[i]))),
            }
        };
        let count = |i: usize| -> Result<Option<usize>> {
            match cell(i) {
                "" => Ok(None),
                s => s
                    .parse()
                    .map(Some)
                    .map_err(|_| Error::Report(format!("{}: `{s}` is not a count", COLUMNS[i]))),
            }
        };
        let bad = |e: Error| Error::Report(e.to_string());
        Ok(Self {
            dataset: cell(0).to_string(),
            feature_mode: cell(1).parse().map_err(bad)?,
            method: cell(2).parse().map_err(bad)?,
            metrics: MetricRow {
                accuracy: float(3)?,
                precision: float(4)?,
                recall: float(5)?,
                f1: float(6)?,
                fpr: float(7)?,
                fnr: float(8)?,
                auc: float(9)?,
            },
            flips: count(10)?,
            restored: count(11)?,
            seconds: float(SECONDS)?,
            error: None,
        })
    }

    fn to_json(&self) -> Value {
        let mut obj = Map::new();
        for (i, (name, cell)) in COLUMNS.iter().zip(self.cells()).enumerate() {
            let value = if cell.is_empty() {
                Value::Null
            } else if i < 3 {
                Value::String(cell)
            } else if FLOAT_COLUMNS.contains(&i) || i == SECONDS {
                let v: f64 = cell.parse().expect("rendered floats parse");
                serde_json::Number::from_f64(v)
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            } else {
                Value::Number(cell.parse::<u64>().expect("rendered counts parse").into())
            };
            obj.insert((*name).to_string(), value);
        }
        if let Some(e) = &self.error {
            obj.insert("error".into(), Value::String(e.clone()));
        }
        Value::Object(obj)
    }

    fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Report("a row is not a JSON object".into()))?;
        let mut cells = Vec::with_capacity(COLUMNS.len());
        for (i, name) in COLUMNS.iter().enumerate() {
            let cell = match obj.get(*name) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) if i < 3 => s.clone(),
                Some(Value::Number(n)) if FLOAT_COLUMNS.contains(&i) || i == SECONDS => {
                    fmt6(n.as_f64().ok_or_else(|| Error::Report(format!("{name}: bad number")))?)
                }
                Some(Value::Number(n)) if i >= 3 => n
                    .as_u64()
                    .ok_or_else(|| Error::Report(format!("{name}: `{n}` is not a count")))?
                    .to_string(),
                Some(other) => return Err(Error::Report(format!("{name}: unexpected value {other}"))),
            };
            cells.push(cell);
        }
        let mut row = Self::from_cells(&cells)?;
        row.error = match obj.get("error") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => return Err(Error::Report(format!("error: unexpected value {other}"))),
        };
        Ok(row)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub master_seed: u64,
    pub version: String,
    pub repeats: usize,
}

impl Environment {
    pub fn new(master_seed: u64, repeats: usize) -> Self {
        Self {
            master_seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            repeats,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    /// Absent when the report was read back from CSV.
    pub environment: Option<Environment>,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn row(&self, method: Method, mode: FeatureMode) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method && r.feature_mode == mode)
    }

    pub fn sort_rows(&mut self) {
        self.rows.sort_by_key(|r| (r.method, r.feature_mode));
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.cells())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(input: impl Read) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != COLUMNS {
            return Err(Error::Report(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            rows.push(ReportRow::from_cells(&record.iter().collect::<Vec<_>>())?);
        }
        Ok(Self {
            environment: None,
            rows,
        })
    }

    pub fn to_json(&self) -> String {
        let mut obj = Map::new();
        obj.insert(
            "environment".into(),
            self.environment
                .as_ref()
                .map(|e| serde_json::to_value(e).expect("environment serializes"))
                .unwrap_or(Value::Null),
        );
        obj.insert(
            "rows".into(),
            Value::Array(self.rows.iter().map(ReportRow::to_json).collect()),
        );
        let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("reports serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let environment = match value.get("environment") {
            None | Some(Value::Null) => None,
            Some(env) => Some(serde_json::from_value(env.clone())?),
        };
        let rows = value
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Report("missing `rows` array".into()))?
            .iter()
            .map(ReportRow::from_json)
            .collect::<Result<_>>()?;
        Ok(Self { environment, rows })
    }

    /// Fixed-width table with metrics in percent.
    pub fn render_table(&self) -> String {
        let mut header: Vec<String> = COLUMNS.iter().map(|c| c.to_string()).collect();
        for h in &mut header[FLOAT_COLUMNS] {
            h.push_str(" %");
        }
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                let mut cells = row.cells();
                for (cell, v) in cells[FLOAT_COLUMNS].iter_mut().zip(row.metric_values()) {
                    *cell = v.map(|v| format!("{:.2}", v * 100.0)).unwrap_or_else(|| "-".into());
                }
                if let Some(e) = &row.error {
                    cells[SECONDS] = format!("failed: {e}");
                }
                cells
            })
            .collect();
        let widths: Vec<usize> = (0..COLUMNS.len())
            .map(|i| {
                body.iter()
                    .map(|r| r[i].len())
                    .chain([header[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut text = String::new();
        for line in std::iter::once(&header).chain(&body) {
            let cells: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(text, "{}", cells.join("  ").trim_end());
        }
        text
    }

    /// Writes the report to `path`; an empty report is refused.
    pub fn emit(&self, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Report("refusing to write an empty report".into()));
        }
        let path = path.as_ref();
        let file_err = |source| Error::File {
            path: path.to_path_buf(),
            source,
        };
        let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(file_err)?);
        match format {
            ReportFormat::Csv => self.write_csv(&mut file)?,
            ReportFormat::Json => file.write_all(self.to_json().as_bytes()).map_err(file_err)?,
            ReportFormat::Table => file.write_all(self.render_table().as_bytes()).map_err(file_err)?,
        }
        file.flush().map_err(file_err)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, format: ReportFormat) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        match format {
            ReportFormat::Csv => Self::read_csv(text.as_bytes()),
            ReportFormat::Json => Self::from_json(&text),
            ReportFormat::Table => Err(Error::Report("tables are write-only".into())),
        }
    }
}

/// Six decimals. `{:.6}` rounds the exact binary value, so only values that
/// sit exactly on a half step are ties, and those go to even.
pub fn fmt6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}
