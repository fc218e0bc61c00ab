//! Result documents: every number carries its provenance, records follow a
//! per-kind column schema, and everything except the wall-clock block is a
//! deterministic function of the configuration.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use indexmap::IndexMap;
use latsec_core::channel::{ErrorRate, MeanEstimate};
use latsec_core::info::{ExactBits, Prob};
use latsec_core::Rational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "latsec-result/1";

/// A number and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "provenance")]
pub enum Number {
    /// Computed exactly; `exact` is a fraction or a closed form in `log2`.
    #[serde(rename = "exact-rational")]
    Exact { value: f64, exact: String },
    #[serde(rename = "monte-carlo±stderr")]
    MonteCarlo { value: f64, stderr: f64, samples: u64 },
    /// Closed-form expression evaluated in floating point.
    #[serde(rename = "formula")]
    Formula { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Field {
    Number(Number),
    Flag(bool),
    Text(String),
}

/// Column types; they fix the CSV expansion of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnType {
    Exact,
    MonteCarlo,
    Formula,
    Flag,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
}

pub type Schema = &'static [(&'static str, ColumnType)];

/// One row of results. Missing fields are allowed (e.g. figures that only
/// exist in one regime); they are blank in CSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Record(pub IndexMap<String, Field>);

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn get(&self, name: &str) -> Option<&Field> {
        self.0.get(name)
    }

    pub fn put(&mut self, name: &str, f: Field) -> &mut Self {
        self.0.insert(name.to_string(), f);
        self
    }

    pub fn bits(&mut self, name: &str, b: &ExactBits) -> &mut Self {
        self.put(
            name,
            Field::Number(Number::Exact {
                value: b.to_f64(),
                exact: b.to_string(),
            }),
        )
    }

    pub fn rational(&mut self, name: &str, r: Rational) -> &mut Self {
        self.put(
            name,
            Field::Number(Number::Exact {
                value: *r.numer() as f64 / *r.denom() as f64,
                exact: format!("{}/{}", r.numer(), r.denom()),
            }),
        )
    }

    pub fn prob(&mut self, name: &str, p: Prob) -> &mut Self {
        self.put(
            name,
            Field::Number(Number::Exact {
                value: *p.numer() as f64 / *p.denom() as f64,
                exact: format!("{}/{}", p.numer(), p.denom()),
            }),
        )
    }

    pub fn count(&mut self, name: &str, c: u128) -> &mut Self {
        self.put(
            name,
            Field::Number(Number::Exact {
                value: c as f64,
                exact: format!("{c}/1"),
            }),
        )
    }

    /// Non-finite values (JSON has no infinity) are stored as text.
    pub fn formula(&mut self, name: &str, v: f64) -> &mut Self {
        if !v.is_finite() {
            return self.put(name, Field::Text(float(v)));
        }
        self.put(name, Field::Number(Number::Formula { value: v }))
    }

    pub fn mean(&mut self, name: &str, m: &MeanEstimate) -> &mut Self {
        self.put(
            name,
            Field::Number(Number::MonteCarlo {
                value: m.mean,
                stderr: m.stderr,
                samples: m.samples,
            }),
        )
    }

    pub fn error_rate(&mut self, name: &str, e: &ErrorRate) -> &mut Self {
        self.put(
            name,
            Field::Number(Number::MonteCarlo {
                value: e.rate(),
                stderr: e.stderr(),
                samples: e.trials,
            }),
        )
    }

    pub fn flag(&mut self, name: &str, b: bool) -> &mut Self {
        self.put(name, Field::Flag(b))
    }

    pub fn text(&mut self, name: &str, s: impl Into<String>) -> &mut Self {
        self.put(name, Field::Text(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub passed: bool,
    pub checks: Vec<Check>,
    pub budget_exceeded: bool,
}

impl Verdict {
    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
        self.passed = self.checks.iter().all(|c| c.passed);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WallClock {
    pub started_unix_ms: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultEnvelope {
    pub schema_version: String,
    pub kind: String,
    pub versions: IndexMap<String, String>,
    pub config: IndexMap<String, String>,
    pub columns: Vec<Column>,
    pub summary: Record,
    pub results: Vec<Record>,
    pub verdict: Verdict,
    /// Excluded from every determinism comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock: Option<WallClock>,
}

impl ResultEnvelope {
    pub fn new(kind: impl Into<String>, config: IndexMap<String, String>, schema: Schema) -> Self {
        let mut versions = IndexMap::new();
        versions.insert("latsec".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("latsec-core".to_string(), latsec_core::VERSION.to_string());
        ResultEnvelope {
            schema_version: SCHEMA_VERSION.to_string(),
            kind: kind.into(),
            versions,
            config,
            columns: schema
                .iter()
                .map(|&(name, ty)| Column {
                    name: name.to_string(),
                    ty,
                })
                .collect(),
            summary: Record::new(),
            results: Vec::new(),
            verdict: Verdict {
                passed: true,
                ..Verdict::default()
            },
            wall_clock: None,
        }
    }

    /// JSON of everything except the wall clock.
    pub fn payload_json(&self) -> String {
        let mut copy = self.clone();
        copy.wall_clock = None;
        serde_json::to_string_pretty(&copy).expect("envelope serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Header of the CSV rendering: exact numbers get a float and a
    /// fraction column, Monte Carlo numbers a float, a standard error and a
    /// sample count.
    pub fn csv_header(&self) -> Vec<String> {
        let mut h = Vec::new();
        for c in &self.columns {
            h.push(c.name.clone());
            match c.ty {
                ColumnType::Exact => h.push(format!("{}_exact", c.name)),
                ColumnType::MonteCarlo => {
                    h.push(format!("{}_stderr", c.name));
                    h.push(format!("{}_samples", c.name));
                }
                _ => {}
            }
        }
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.results
            .iter()
            .map(|r| {
                let mut row = Vec::new();
                for c in &self.columns {
                    let width = match c.ty {
                        ColumnType::Exact => 2,
                        ColumnType::MonteCarlo => 3,
                        _ => 1,
                    };
                    let cells: Vec<String> = match r.get(&c.name) {
                        None => vec![String::new(); width],
                        Some(Field::Flag(b)) => vec![b.to_string()],
                        Some(Field::Text(s)) => vec![s.clone()],
                        Some(Field::Number(Number::Formula { value })) => vec![float(*value)],
                        Some(Field::Number(Number::Exact { value, exact })) => vec![float(*value), exact.clone()],
                        Some(Field::Number(Number::MonteCarlo { value, stderr, samples })) => {
                            vec![float(*value), float(*stderr), samples.to_string()]
                        }
                    };
                    debug_assert_eq!(cells.len(), width, "field `{}` does not match its column", c.name);
                    row.extend(cells);
                }
                row
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<String, EmitError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.csv_header())?;
        for row in self.csv_rows() {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| EmitError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v > 0.0 {
        "inf".to_string()
    } else if v < 0.0 {
        "-inf".to_string()
    } else {
        "nan".to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("cannot write results: {0}")]
    Io(#[from] io::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Writes the envelope to `path`, or to standard output when `path` is
/// `None`.
pub fn emit(envelope: &ResultEnvelope, format: Format, path: Option<&Path>) -> Result<(), EmitError> {
    let text = match format {
        Format::Json => envelope.to_json() + "\n",
        Format::Csv => envelope.to_csv()?,
    };
    match path {
        Some(p) => File::create(p)?.write_all(text.as_bytes())?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
