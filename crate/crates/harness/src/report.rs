//! Machine-readable outputs. Everything written here parses back to the same
//! values.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use diskroute_core::router::RouteTrace;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One row per instance and scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: String,
    pub kind: String,
    pub n: usize,
    pub diameter: f64,
    pub density: usize,
    pub c: Option<f64>,
    pub wspd_pairs: usize,
    pub routed: usize,
    pub max_stretch: Option<f64>,
    pub mean_stretch: Option<f64>,
    pub max_table_bits: u64,
    pub max_label_bits: u32,
    pub max_header_bits: Option<u64>,
    /// Wall time of preprocessing; only present in build reports.
    pub prep_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub src: usize,
    pub dst: usize,
    pub path: Vec<usize>,
    pub d_rho: f64,
    pub d_opt: f64,
    pub ratio: f64,
    pub steps: usize,
    pub max_header_bits: u64,
}

impl TraceRecord {
    pub fn from_trace(trace: &RouteTrace, d_opt: f64) -> Self {
        Self {
            src: trace.source,
            dst: trace.target,
            path: trace.path.clone(),
            d_rho: trace.distance,
            d_opt,
            ratio: diskroute_core::router::stretch_ratio(trace.distance, d_opt),
            steps: trace.step_count,
            max_header_bits: trace.max_header_bits,
        }
    }
}

/// Flat form for CSV; the path is a space separated list.
#[derive(Serialize, Deserialize)]
struct CsvTrace {
    src: usize,
    dst: usize,
    path: String,
    d_rho: f64,
    d_opt: f64,
    ratio: f64,
    steps: usize,
    max_header_bits: u64,
}

impl From<&TraceRecord> for CsvTrace {
    fn from(r: &TraceRecord) -> Self {
        Self {
            src: r.src,
            dst: r.dst,
            path: r.path.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
            d_rho: r.d_rho,
            d_opt: r.d_opt,
            ratio: r.ratio,
            steps: r.steps,
            max_header_bits: r.max_header_bits,
        }
    }
}

impl TryFrom<CsvTrace> for TraceRecord {
    type Error = HarnessError;

    fn try_from(r: CsvTrace) -> Result<Self, HarnessError> {
        let path = r
            .path
            .split_whitespace()
            .map(|v| {
                v.parse()
                    .map_err(|_| HarnessError::Usage(format!("bad path entry `{v}`")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            src: r.src,
            dst: r.dst,
            path,
            d_rho: r.d_rho,
            d_opt: r.d_opt,
            ratio: r.ratio,
            steps: r.steps,
            max_header_bits: r.max_header_bits,
        })
    }
}

pub fn write_rows<T: Serialize, W: Write>(rows: &[T], format: Format, out: W) -> Result<(), HarnessError> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out).map_err(|e| HarnessError::io("<output>", e))?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush().map_err(|e| HarnessError::io("<output>", e))?;
        }
    }
    Ok(())
}

pub fn read_rows<T: DeserializeOwned, R: Read>(input: R, format: Format) -> Result<Vec<T>, HarnessError> {
    match format {
        Format::Json => Ok(serde_json::from_reader(input)?),
        Format::Csv => csv::Reader::from_reader(input)
            .deserialize()
            .map(|r| r.map_err(HarnessError::from))
            .collect(),
    }
}

pub fn write_traces<W: Write>(records: &[TraceRecord], format: Format, out: W) -> Result<(), HarnessError> {
    match format {
        Format::Json => write_rows(records, format, out),
        Format::Csv => {
            let flat: Vec<CsvTrace> = records.iter().map(CsvTrace::from).collect();
            write_rows(&flat, format, out)
        }
    }
}

pub fn read_traces<R: Read>(input: R, format: Format) -> Result<Vec<TraceRecord>, HarnessError> {
    match format {
        Format::Json => read_rows(input, format),
        Format::Csv => read_rows::<CsvTrace, _>(input, format)?
            .into_iter()
            .map(TraceRecord::try_from)
            .collect(),
    }
}

/// Output of `route`: JSON holds both parts; CSV files hold the records and
/// the summary is reported separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteReport {
    pub summary: ReportRow,
    pub records: Vec<TraceRecord>,
}
