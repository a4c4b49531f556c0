//! Dataset emission. Payload files (`<name>.csv`, `<name>.json`) depend only
//! on the inputs; run metadata, including the timestamp, goes to a
//! `<name>.meta.json` sidecar.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Spectrum,
    CorrelationMatrix,
    Sweep,
    DensityMatrix,
    OverlapMatrix,
    TomographyReport,
    OptimizationReport,
    /// Raw tomography counts, readable by `tomography reconstruct`.
    Counts,
    /// Closed form against the direct quadrature.
    OracleComparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            _ => Err(Error::InvalidParameter(format!("format must be csv, json or both, got `{s}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Both => "both",
        })
    }
}

/// Long-format table. Floats are written with Rust's shortest round-trip
/// formatting, so they parse back to the same bits as the JSON values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub kind: DatasetKind,
    /// File stem.
    pub name: String,
    /// Absent for report-style datasets, which are JSON only.
    pub table: Option<Table>,
    pub data: Value,
    /// Dataset-specific metadata (subspace truncation, window, ...).
    pub meta: Value,
}

impl Dataset {
    pub fn new(kind: DatasetKind, name: impl Into<String>, data: Value) -> Self {
        Self {
            kind,
            name: name.into(),
            table: None,
            data,
            meta: json!({}),
        }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn with_meta(mut self, meta: Value) -> Self {
        self.meta = meta;
        self
    }
}

/// One written payload file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Emitted {
    pub kind: DatasetKind,
    pub path: PathBuf,
    pub format: Format,
}

/// Run-wide metadata shared by every dataset of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub partial: bool,
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn meta_block(run: &RunMeta, dataset: &Dataset) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": timestamp(),
        "command": run.command,
        "kind": dataset.kind,
        "config": run.config,
        "seed": run.seed,
        "partial": run.partial,
        "dataset": dataset.meta,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn to_json_bytes(v: &Value) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    b.push(b'\n');
    Ok(b)
}

/// Writes every dataset in the requested format plus its meta sidecar.
pub fn emit(datasets: &[Dataset], out_dir: &Path, format: Format, run: &RunMeta) -> Result<Vec<Emitted>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    for d in datasets {
        let want_csv = format != Format::Json && d.table.is_some();
        let want_json = format != Format::Csv || d.table.is_none();
        if let (true, Some(t)) = (want_csv, &d.table) {
            let path = out_dir.join(format!("{}.csv", d.name));
            write_file(&path, &t.to_csv()?)?;
            written.push(Emitted {
                kind: d.kind,
                path,
                format: Format::Csv,
            });
        }
        if want_json {
            let path = out_dir.join(format!("{}.json", d.name));
            write_file(&path, &to_json_bytes(&d.data)?)?;
            written.push(Emitted {
                kind: d.kind,
                path,
                format: Format::Json,
            });
        }
        write_file(&out_dir.join(format!("{}.meta.json", d.name)), &to_json_bytes(&meta_block(run, d))?)?;
    }
    Ok(written)
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    x.to_string()
}
