//! File formats: a flat binary field layout, CSV time series, and JSON reports
//! with floats fixed to 17 significant digits so repeated runs are byte-identical.
//!
//! Binary field layout (little endian):
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `KSMFLD01` |
//! | 4 | dimension `n` as u32 |
//! | 16 n | per axis: resolution u64, length f64 |
//! | 1 | parity bitmask (bit i set = sine on axis i) |
//! | 8 N | grid values, row-major (last axis fastest) |

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::spectral::{assemble_domain, Parity};
use serde::Serialize;
use serde_json::Value;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"KSMFLD01";

pub fn encode_field(f: &ScalarField) -> Vec<u8> {
    let d = f.domain();
    let mut out = Vec::with_capacity(13 + 16 * d.dimension() + 8 * d.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(d.dimension() as u32).to_le_bytes());
    for (n, l) in d.resolution().iter().zip(d.lengths()) {
        out.extend_from_slice(&(*n as u64).to_le_bytes());
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.push(f.parity().bits());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<ScalarField> {
    let bad = |m: &str| Error::Config(format!("field file: {m}"));
    let mut cur = bytes;
    let mut take = |k: usize| -> Result<&[u8]> {
        if cur.len() < k {
            return Err(bad("truncated"));
        }
        let (head, tail) = cur.split_at(k);
        cur = tail;
        Ok(head)
    };
    if take(8)? != MAGIC {
        return Err(bad("bad magic"));
    }
    let dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let mut res = Vec::with_capacity(dim);
    let mut len = Vec::with_capacity(dim);
    for _ in 0..dim {
        res.push(u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize);
        len.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    let parity = Parity::from_bits(take(1)?[0]);
    let domain = assemble_domain(&len, &res)?;
    let n = domain.len();
    let raw = take(8 * n)?;
    let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if bytes.len() != 13 + 16 * dim + 8 * n {
        return Err(bad("trailing bytes"));
    }
    ScalarField::with_parity(domain, parity, values)
}

pub fn write_field(path: &Path, f: &ScalarField) -> Result<()> {
    std::fs::File::create(path)?.write_all(&encode_field(f))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    decode_field(&buf)
}

/// Fixed 17-significant-digit rendering of a float.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // JSON has no non-finite literals; CSV readers understand these.
        format!("{x}")
    }
}

/// Writes a header and rows of floats as CSV.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_float).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Grid values of a field as CSV: coordinates then value.
pub fn write_field_csv(path: &Path, f: &ScalarField) -> Result<()> {
    let d = f.domain();
    let dim = d.dimension();
    let mut header: Vec<&str> = ["x", "y", "z"][..dim].to_vec();
    header.push("value");
    let rows = (0..d.len()).map(|j| {
        let p = d.point(j);
        let mut row = p[..dim].to_vec();
        row.push(f.values()[j]);
        row
    });
    write_csv(path, &header, rows)
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad);
                render(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}]", "  ".repeat(indent));
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                let _ = write!(out, "{pad}{}: ", Value::String(k.clone()));
                render(x, indent + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            let _ = write!(out, "{}}}", "  ".repeat(indent));
        }
    }
}

/// Pretty JSON with sorted keys and 17-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    render(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}
