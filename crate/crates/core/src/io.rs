//! Output formats: commented CSV, JSON reports and raw binary samples.
//!
//! CSV floats are written with 17 significant digits so every value
//! round-trips exactly; header lines start with `#`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::State;

/// Leading bytes of a binary sample file.
pub const SAMPLE_MAGIC: &[u8; 8] = b"DLTX0001";

/// Crate version, embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `x` with 17 significant digits; negative zero prints as zero.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Writes `#`-prefixed header lines, a column line and the rows.
pub fn write_csv<W, I>(mut w: W, header: &[String], columns: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    for line in header {
        for part in line.lines() {
            writeln!(w, "# {part}")?;
        }
    }
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        let row = row.as_ref();
        if row.len() != columns.len() {
            return Err(Error::Contract(format!(
                "row of {} values for {} columns",
                row.len(),
                columns.len()
            )));
        }
        let line: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Header lines recording the producing version and the resolved config.
pub fn provenance_header(command: &str, config: &impl Serialize) -> Result<Vec<String>> {
    Ok(vec![
        format!("dilatox {VERSION} {command}"),
        format!("config: {}", serde_json::to_string(config)?),
    ])
}

/// Rows of `(point..., re, im)` for a complex function on grid points.
pub fn complex_rows<'a>(
    points: impl Iterator<Item = State> + 'a,
    values: &'a [Complex64],
) -> impl Iterator<Item = Vec<f64>> + 'a {
    points.zip(values).map(|(p, v)| {
        let mut row = p.as_slice().to_vec();
        row.push(v.re);
        row.push(v.im);
        row
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes planar samples as little-endian `f64` pairs after a 16-byte
/// header: [`SAMPLE_MAGIC`] and the sample count as `u64`. One-dimensional
/// samples get a zero second coordinate.
pub fn write_samples<W: Write>(mut w: W, samples: &[State]) -> Result<()> {
    if samples.iter().any(|s| s.dim() > 2) {
        return Err(Error::Contract(
            "binary export holds at most two components".into(),
        ));
    }
    w.write_all(SAMPLE_MAGIC)?;
    w.write_all(&(samples.len() as u64).to_le_bytes())?;
    for s in samples {
        let y = if s.dim() == 2 { s[1] } else { 0.0 };
        w.write_all(&s[0].to_le_bytes())?;
        w.write_all(&y.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(mut r: R) -> Result<Vec<[f64; 2]>> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[..8] != SAMPLE_MAGIC {
        return Err(Error::Format("not a sample file (bad magic)".into()));
    }
    let count = u64::from_le_bytes(head[8..].try_into().expect("eight bytes"));
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() as u64 != count * 16 {
        return Err(Error::Format(format!(
            "header announces {count} samples but the body holds {} bytes",
            body.len()
        )));
    }
    Ok(body
        .chunks_exact(16)
        .map(|c| {
            let x = f64::from_le_bytes(c[..8].try_into().expect("eight bytes"));
            let y = f64::from_le_bytes(c[8..].try_into().expect("eight bytes"));
            [x, y]
        })
        .collect())
}
