//! Sweep CSV: `voltage_V,phase_rad,counts_d1,counts_d2`, LF endings,
//! phases with 9 significant digits, integer counts.

use std::io::{Read, Write};

use anyhow::{Context, Result};
use deutsch_optics::DetectionRecord;

use crate::UsageError;

pub const HEADER: [&str; 4] = ["voltage_V", "phase_rad", "counts_d1", "counts_d2"];

/// Formats `x` with `digits` significant digits in positional notation.
pub fn sig_digits(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn write_records<W: Write>(out: W, records: &[DetectionRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.voltage.to_string(),
            sig_digits(r.phase, 9),
            r.counts_d1.to_string(),
            r.counts_d2.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sweep CSV. Format errors are [`UsageError`]s carrying the row number
/// (1-based, header is row 1).
pub fn read_records<R: Read>(input: R) -> Result<Vec<DetectionRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| UsageError(format!("row 1: unreadable header: {e}")))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(UsageError("empty CSV: missing header".into()).into());
    }
    if headers.iter().ne(HEADER.iter().copied()) {
        return Err(UsageError(format!(
            "row 1: expected header `{}`, found `{}`",
            HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        ))
        .into());
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| UsageError(format!("row {row}: {e}")))?;
        let field = |idx: usize| rec.get(idx).unwrap_or("").trim();
        let real = |idx: usize| -> Result<f64> {
            field(idx)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    UsageError(format!(
                        "row {row}: `{}` is not a number in column {}",
                        field(idx),
                        HEADER[idx]
                    ))
                    .into()
                })
        };
        let count = |idx: usize| -> Result<u64> {
            field(idx).parse::<u64>().map_err(|_| {
                UsageError(format!(
                    "row {row}: `{}` is not a non-negative integer in column {}",
                    field(idx),
                    HEADER[idx]
                ))
                .into()
            })
        };
        out.push(DetectionRecord {
            voltage: real(0)?,
            phase: real(1)?,
            counts_d1: count(2)?,
            counts_d2: count(3)?,
        });
    }
    if out.is_empty() {
        return Err(UsageError("no data rows".into()).into());
    }
    Ok(out)
}

pub fn read_file(path: &std::path::Path) -> Result<Vec<DetectionRecord>> {
    let f = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_records(f)
}
