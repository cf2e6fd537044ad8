//! CSV and JSON-lines writers for result records.
//!
//! CSV is UTF-8 with `\n` line endings and a mandatory header; floats carry
//! 17 significant digits and missing values are written as `NA`. JSON-lines
//! writes one object per line with missing values as `null`.

use std::io::Write;

use serde::Serialize;

/// A record that can be flattened into one CSV row.
pub trait CsvRecord {
    fn header(&self) -> Vec<String>;
    fn fields(&self) -> Vec<String>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "jsonl" | "json-lines" => Some(OutputFormat::JsonLines),
            _ => None,
        }
    }
}

/// Round-trip exact float text.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NA".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fmt_float)
}

pub fn write_records<W, T>(out: W, records: &[T], format: OutputFormat) -> std::io::Result<()>
where
    W: Write,
    T: CsvRecord + Serialize,
{
    match format {
        OutputFormat::Csv => write_csv(out, records),
        OutputFormat::JsonLines => write_jsonl(out, records),
    }
}

pub fn write_csv<W: Write, T: CsvRecord>(out: W, records: &[T]) -> std::io::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    if let Some(first) = records.first() {
        writer.write_record(first.header())?;
    }
    for r in records {
        writer.write_record(r.fields())?;
    }
    writer.flush()
}

pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, records: &[T]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
