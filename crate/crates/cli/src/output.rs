//! CSV and JSON writers. Every CSV starts with a `# schema_version=N` line
//! followed by the header, even when there are no data rows.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A row type with a fixed CSV layout.
pub trait Row: Serialize {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Six significant digits in scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRow {
    pub experiment: String,
    pub nt: usize,
    pub nr: usize,
    pub snr_db: f64,
    pub detector: String,
    pub las: bool,
    pub rho: Option<f64>,
    pub n_f: Option<usize>,
    pub trials: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub flops_model: u64,
    pub flops_measured: u64,
    pub flagged: bool,
}

impl Row for BerRow {
    const HEADER: &'static [&'static str] = &[
        "experiment",
        "nt",
        "nr",
        "snr_db",
        "detector",
        "las",
        "rho",
        "n_f",
        "trials",
        "bit_errors",
        "ber",
        "flops_model",
        "flops_measured",
        "flagged",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.nt.to_string(),
            self.nr.to_string(),
            self.snr_db.to_string(),
            self.detector.clone(),
            self.las.to_string(),
            opt(&self.rho),
            opt(&self.n_f),
            self.trials.to_string(),
            self.bit_errors.to_string(),
            sci(self.ber),
            self.flops_model.to_string(),
            self.flops_measured.to_string(),
            self.flagged.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub experiment: String,
    pub nt: usize,
    pub nr: usize,
    pub snr_db: f64,
    pub detector: String,
    pub rho: f64,
    pub n_f: usize,
    pub trials: u64,
    pub step: usize,
    pub mean_likelihood: f64,
    pub mean_ber: f64,
}

impl Row for TraceRow {
    const HEADER: &'static [&'static str] = &[
        "experiment",
        "nt",
        "nr",
        "snr_db",
        "detector",
        "rho",
        "n_f",
        "trials",
        "step",
        "mean_likelihood",
        "mean_ber",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.nt.to_string(),
            self.nr.to_string(),
            self.snr_db.to_string(),
            self.detector.clone(),
            self.rho.to_string(),
            self.n_f.to_string(),
            self.trials.to_string(),
            self.step.to_string(),
            format!("{:.9e}", self.mean_likelihood),
            sci(self.mean_ber),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlopsRow {
    pub experiment: String,
    pub nt: usize,
    pub nr: usize,
    pub n_f: Option<usize>,
    pub detector: String,
    pub flops_model: u64,
    pub flops_measured: u64,
    pub relative_error: f64,
    pub verdict: String,
    pub notes: String,
}

impl Row for FlopsRow {
    const HEADER: &'static [&'static str] = &[
        "experiment",
        "nt",
        "nr",
        "n_f",
        "detector",
        "flops_model",
        "flops_measured",
        "relative_error",
        "verdict",
        "notes",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.nt.to_string(),
            self.nr.to_string(),
            opt(&self.n_f),
            self.detector.clone(),
            self.flops_model.to_string(),
            self.flops_measured.to_string(),
            sci(self.relative_error),
            self.verdict.clone(),
            self.notes.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub experiment: String,
    pub nt: usize,
    pub nr: usize,
    pub n_f: Option<usize>,
    pub detector: String,
    pub repetitions: usize,
    pub median_s: f64,
    pub p10_s: f64,
    pub p90_s: f64,
}

impl Row for BenchRow {
    const HEADER: &'static [&'static str] =
        &["experiment", "nt", "nr", "n_f", "detector", "repetitions", "median_s", "p10_s", "p90_s"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.nt.to_string(),
            self.nr.to_string(),
            opt(&self.n_f),
            self.detector.clone(),
            self.repetitions.to_string(),
            sci(self.median_s),
            sci(self.p10_s),
            sci(self.p90_s),
        ]
    }
}

pub fn write_csv<R: Row, W: Write>(rows: &[R], out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "# schema_version={SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()
}

#[derive(Serialize)]
struct JsonDoc<'a, R> {
    schema_version: u32,
    rows: &'a [R],
}

pub fn write_json<R: Row, W: Write>(rows: &[R], out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    serde_json::to_writer_pretty(
        &mut out,
        &JsonDoc {
            schema_version: SCHEMA_VERSION,
            rows,
        },
    )?;
    writeln!(out)?;
    out.flush()
}

/// Writes `rows` to `path`, or to stdout when no path is given.
pub fn emit<R: Row>(rows: &[R], format: Format, path: Option<&Path>) -> io::Result<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Csv => write_csv(rows, sink),
        Format::Json => write_json(rows, sink),
    }
}
