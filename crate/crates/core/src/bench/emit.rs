//! CSV and JSON output of benchmark records.
//!
//! CSV floats use nine significant digits in scientific notation.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use super::BenchRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 9] = [
    "property",
    "family",
    "estimator",
    "n",
    "trials",
    "true_value",
    "mean_estimate",
    "mae",
    "std_dev",
];

// placeholder path for writer errors, replaced once the destination is known
const UNNAMED: &str = "<output>";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn float(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.property.clone(),
            r.family.clone(),
            r.estimator.clone(),
            r.n.to_string(),
            r.trials.to_string(),
            float(r.true_value),
            float(r.mean_estimate),
            float(r.mae),
            float(r.std_dev),
        ])?;
    }
    w.flush().map_err(|e| Error::io(UNNAMED, e))?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[BenchRecord], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    writeln!(out).map_err(|e| Error::io(UNNAMED, e))?;
    Ok(())
}

/// Writes records to `path`, or to stdout when `path` is `None` or `-`.
pub fn emit_results(records: &[BenchRecord], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let write = |out: &mut dyn Write| match format {
        OutputFormat::Csv => write_csv(records, out),
        OutputFormat::Json => write_json(records, out),
    };
    match path {
        Some(p) if p != Path::new("-") => {
            let file = File::create(p).map_err(|e| Error::io(p, e))?;
            let mut out = BufWriter::new(file);
            write(&mut out).map_err(|e| with_path(e, p))?;
            out.flush().map_err(|e| Error::io(p, e))
        }
        _ => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
        }
    }
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Csv(e) if e.is_io_error() => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!("checked io error"),
        },
        Error::Io { path: old, source } if old == Path::new(UNNAMED) => Error::io(path, source),
        other => other,
    }
}

/// Parses CSV in the emitted schema; the header must match exactly.
pub fn parse_csv<R: Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            path: "<csv>".into(),
            reason: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    reader
        .deserialize::<BenchRecord>()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file).map_err(|e| match e {
        Error::Parse { reason, .. } => Error::Parse {
            path: path.into(),
            reason,
        },
        other => other,
    })
}
