use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Format;

/// Nearest-rank quantile; `v` need not be sorted.
pub fn quantile(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let k = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len());
    s[k - 1]
}

/// Serializes rows as CSV (with header) or JSON lines.
pub fn write_rows<R: Serialize>(rows: &[R], out: impl Write, format: Format) -> anyhow::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut w = BufWriter::new(out);
            for r in rows {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_rows_to<R: Serialize>(rows: &[R], path: Option<&Path>, format: Format) -> anyhow::Result<()> {
    if let Some(p) = path {
        let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_rows(rows, f, format)?;
    }
    Ok(())
}

/// SHA-256 of the CSV rendering of `rows`, hex encoded.
pub fn csv_hash<R: Serialize>(rows: &[R]) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf, Format::Csv)?;
    Ok(hex::encode(Sha256::digest(&buf)))
}
