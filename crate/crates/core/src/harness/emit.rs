//! Table emission and parsing: CSV with a fixed schema, JSON via serde.

use std::fmt::Write as _;
use std::str::FromStr;

use super::sweep::SweepRow;
use crate::error::{Error, Result};

/// Output encodings for result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown output format `{other}`"
            ))),
        }
    }
}

const CSV_HEADER: &str =
    "axis,value,placement,delivery,mean_rate,stddev,ci95,iterations,seed,lower_bound";

/// Serializes rows. CSV uses exactly the pinned column set with `.` decimals
/// and `\n` line endings; floats print in shortest-round-trip form so
/// `parse_table(emit_table(t)) == t`.
pub fn emit_table(rows: &[SweepRow], format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut out = String::with_capacity(64 * (rows.len() + 1));
            out.push_str(CSV_HEADER);
            out.push('\n');
            for row in rows {
                let _ = write!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    row.axis,
                    row.value,
                    row.placement,
                    row.delivery,
                    row.mean_rate,
                    row.stddev,
                    row.ci95,
                    row.iterations,
                    row.seed
                );
                out.push(',');
                if let Some(bound) = row.lower_bound {
                    let _ = write!(out, "{bound}");
                }
                out.push('\n');
            }
            out
        }
        TableFormat::Json => {
            let mut out = serde_json::to_string_pretty(rows).expect("rows serialize");
            out.push('\n');
            out
        }
    }
}

/// Parses a table previously produced by [`emit_table`].
pub fn parse_table(text: &str, format: TableFormat) -> Result<Vec<SweepRow>> {
    match format {
        TableFormat::Csv => parse_csv(text),
        TableFormat::Json => {
            serde_json::from_str(text).map_err(|err| Error::Parse(err.to_string()))
        }
    }
}

fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => {
            return Err(Error::Parse(format!(
                "bad or missing CSV header: {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (number, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::Parse(format!(
                "line {}: expected 10 fields, got {}",
                number + 2,
                fields.len()
            )));
        }
        let field = |idx: usize, name: &str| -> Result<&str> {
            fields
                .get(idx)
                .copied()
                .ok_or_else(|| Error::Parse(format!("missing {name}")))
        };
        let parse_f64 = |idx: usize, name: &str| -> Result<f64> {
            field(idx, name)?
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad {name}", number + 2)))
        };
        let lower_bound = match field(9, "lower_bound")? {
            "" => None,
            raw => Some(raw.parse::<f64>().map_err(|_| {
                Error::Parse(format!("line {}: bad lower_bound", number + 2))
            })?),
        };
        rows.push(SweepRow {
            axis: field(0, "axis")?.to_string(),
            value: parse_f64(1, "value")?,
            placement: field(2, "placement")?.parse()?,
            delivery: field(3, "delivery")?.parse()?,
            mean_rate: parse_f64(4, "mean_rate")?,
            stddev: parse_f64(5, "stddev")?,
            ci95: parse_f64(6, "ci95")?,
            iterations: field(7, "iterations")?
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("line {}: bad iterations", number + 2)))?,
            seed: field(8, "seed")?
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("line {}: bad seed", number + 2)))?,
            lower_bound,
        });
    }
    Ok(rows)
}
