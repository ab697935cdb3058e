//! Recorded I/Q trace files.
//!
//! Two layouts are understood: raw interleaved little-endian `f32` pairs
//! (I then Q, the usual SDR capture format) and a two-column `i,q` text file.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{IqFrame, DEFAULT_SAMPLE_RATE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    /// Interleaved little-endian `f32` I/Q pairs.
    F32le,
    /// `i,q` per line, optional header line.
    Csv,
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32le" | "interleaved-f32le" => Ok(TraceFormat::F32le),
            "csv" => Ok(TraceFormat::Csv),
            other => Err(Error::invalid(format!("unknown trace format {other:?}"))),
        }
    }
}

pub fn load_iq_trace(path: impl AsRef<Path>, format: TraceFormat) -> Result<IqFrame> {
    let bytes = std::fs::read(path)?;
    match format {
        TraceFormat::F32le => parse_f32le(&bytes),
        TraceFormat::Csv => {
            let text = std::str::from_utf8(&bytes).map_err(|e| Error::MalformedTrace(format!("not UTF-8: {e}")))?;
            parse_csv(text)
        }
    }
}

pub fn parse_f32le(bytes: &[u8]) -> Result<IqFrame> {
    if bytes.is_empty() {
        return Err(Error::MalformedTrace("empty trace".into()));
    }
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::MalformedTrace(format!("{} bytes is not a whole number of f32 values", bytes.len())));
    }
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::MalformedTrace(format!("odd float count ({})", bytes.len() / 4)));
    }
    let samples = bytes
        .chunks_exact(8)
        .enumerate()
        .map(|(i, pair)| {
            let re = f32::from_le_bytes([pair[0], pair[1], pair[2], pair[3]]);
            let im = f32::from_le_bytes([pair[4], pair[5], pair[6], pair[7]]);
            if re.is_finite() && im.is_finite() {
                Ok(Complex64::new(re as f64, im as f64))
            } else {
                Err(Error::MalformedTrace(format!("non-finite value in sample {i}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    IqFrame::new(samples, DEFAULT_SAMPLE_RATE)
}

pub fn parse_csv(text: &str) -> Result<IqFrame> {
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(i), Some(q), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::MalformedTrace(format!("line {}: expected two columns", lineno + 1)));
        };
        match (i.parse::<f64>(), q.parse::<f64>()) {
            (Ok(re), Ok(im)) => {
                if !(re.is_finite() && im.is_finite()) {
                    return Err(Error::MalformedTrace(format!("line {}: non-finite value", lineno + 1)));
                }
                samples.push(Complex64::new(re, im));
            }
            // A non-numeric first row is a header.
            _ if samples.is_empty() && lineno == 0 => continue,
            _ => return Err(Error::MalformedTrace(format!("line {}: not a number", lineno + 1))),
        }
    }
    if samples.is_empty() {
        return Err(Error::MalformedTrace("no samples".into()));
    }
    IqFrame::new(samples, DEFAULT_SAMPLE_RATE)
}

/// Writes samples as interleaved little-endian `f32` (values are narrowed).
pub fn write_f32le<W: Write>(mut w: W, frame: &IqFrame) -> Result<()> {
    let mut buf = Vec::with_capacity(frame.len() * 8);
    for s in frame.samples() {
        buf.extend_from_slice(&(s.re as f32).to_le_bytes());
        buf.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Writes an `i,q` header followed by one sample per line. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(mut w: W, frame: &IqFrame) -> Result<()> {
    let mut out = String::with_capacity(frame.len() * 40);
    out.push_str("i,q\n");
    for s in frame.samples() {
        out.push_str(&format!("{:?},{:?}\n", s.re, s.im));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        bytes.extend_from_slice(&0.0f32.to_le_bytes());
        let f = parse_f32le(&bytes).unwrap();
        assert_eq!(f.samples(), &[Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn rejects_bad_binary() {
        assert!(parse_f32le(&[]).is_err());
        assert!(parse_f32le(&[0; 4]).is_err());
        assert!(parse_f32le(&[0; 7]).is_err());
        let mut bytes = f32::NAN.to_le_bytes().to_vec();
        bytes.extend_from_slice(&0.0f32.to_le_bytes());
        assert!(parse_f32le(&bytes).is_err());
    }

    #[test]
    fn csv_with_and_without_header() {
        let a = parse_csv("i,q\n1.5,-2\n0,0.25\n").unwrap();
        let b = parse_csv("1.5,-2\n0,0.25").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples()[0], Complex64::new(1.5, -2.0));
    }

    #[test]
    fn rejects_bad_csv() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("i,q\n").is_err());
        assert!(parse_csv("1,2,3\n").is_err());
        assert!(parse_csv("1,2\nx,y\n").is_err());
        assert!(parse_csv("1,inf\n").is_err());
        assert!(parse_csv("1\n").is_err());
    }

    #[test]
    fn format_names() {
        assert_eq!("f32le".parse::<TraceFormat>().unwrap(), TraceFormat::F32le);
        assert_eq!("interleaved-f32le".parse::<TraceFormat>().unwrap(), TraceFormat::F32le);
        assert_eq!("csv".parse::<TraceFormat>().unwrap(), TraceFormat::Csv);
        assert!("wav".parse::<TraceFormat>().is_err());
    }
}
