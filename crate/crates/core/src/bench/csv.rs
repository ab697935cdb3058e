use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{MetricsRecord, Separator, TimingRecord};
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "separator,snr_db,occupancy,signal_eff,total_eff,occupancy_hat,occupancy_abs_err,mean_runtime_s,frames";

pub const TIMING_HEADER: &str = "separator,frame_len,mean_runtime_s,std_runtime_s,calls";

/// Formats `v` like C's `%.6g`: six significant digits, trailing zeros
/// removed, scientific notation for exponents below -4 or above 5.
pub fn format_g6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{v:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `records` sorted by (separator, SNR, occupancy) under [`CSV_HEADER`].
pub fn write_csv<W: Write>(records: &[MetricsRecord], mut out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Empty);
    }
    let mut rows: Vec<&MetricsRecord> = records.iter().collect();
    rows.sort_by(|a, b| {
        a.separator.cmp(&b.separator).then(a.snr_db.total_cmp(&b.snr_db)).then(a.occupancy.total_cmp(&b.occupancy))
    });
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let nums =
            [r.snr_db, r.occupancy, r.signal_eff, r.total_eff, r.occupancy_hat, r.occupancy_abs_err, r.mean_runtime_s]
                .map(format_g6)
                .join(",");
        writeln!(out, "{},{nums},{}", r.separator, r.frames)?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[MetricsRecord], path: impl AsRef<Path>) -> Result<()> {
    write_csv(records, BufWriter::new(File::create(path)?))
}

pub fn write_timing_csv<W: Write>(records: &[TimingRecord], mut out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Empty);
    }
    writeln!(out, "{TIMING_HEADER}")?;
    for r in records {
        writeln!(out, "{},{},{},{},{}", r.separator, r.frame_len, format_g6(r.mean_s), format_g6(r.std_s), r.calls)?;
    }
    out.flush()?;
    Ok(())
}

/// Parses CSV written by [`write_csv`]. Columns outside the CSV
/// (`occupancy_true`, `failed`) come back as NaN and 0.
pub fn parse_csv(text: &str) -> Result<Vec<MetricsRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(Error::MalformedDocument("missing or unexpected CSV header".into())),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| Error::MalformedDocument(format!("row {}: {what}", i + 1));
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 9 {
                return Err(bad("expected 9 columns"));
            }
            let separator: Separator = cells[0].parse().map_err(|_| bad("unknown separator"))?;
            let mut nums = [0.0; 7];
            for (slot, cell) in nums.iter_mut().zip(&cells[1..8]) {
                *slot = cell.parse().map_err(|_| bad("bad number"))?;
            }
            let frames = cells[8].parse().map_err(|_| bad("bad frame count"))?;
            let [snr_db, occupancy, signal_eff, total_eff, occupancy_hat, occupancy_abs_err, mean_runtime_s] = nums;
            Ok(MetricsRecord {
                separator,
                snr_db,
                occupancy,
                signal_eff,
                total_eff,
                occupancy_hat,
                occupancy_abs_err,
                mean_runtime_s,
                frames,
                occupancy_true: f64::NAN,
                failed: 0,
            })
        })
        .collect()
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<MetricsRecord>> {
    parse_csv(&std::fs::read_to_string(path)?)
}
