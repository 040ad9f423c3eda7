//! Feature matrices on disk.
//!
//! The binary layout is
//!
//! ```text
//! "BSET" | version: u32 = 1 | n: u32 | d: u32 | n*d f32, row-major
//! ```
//!
//! with every integer and float little-endian. A file whose name ends in
//! `.csv` is read instead as one comma-separated row per element; `#` starts
//! a comment line. CSV values go through `f32` so both formats hold the same
//! precision.

use std::path::Path;

use burstset_core::{FeatureSet, SetRepresentation};

use crate::error::{Error, Result};
use crate::fsio;

pub const MAGIC: &[u8; 4] = b"BSET";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

/// Row-major values with their shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub n: usize,
    pub d: usize,
    pub values: Vec<f64>,
}

pub fn encode_bset(n: usize, d: usize, values: &[f64]) -> Vec<u8> {
    assert_eq!(
        values.len(),
        n * d,
        "matrix buffer does not match its shape"
    );
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

pub fn decode_bset(path: &Path, bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(
            path,
            format!(
                "{} bytes is shorter than the {HEADER_LEN}-byte header",
                bytes.len()
            ),
        ));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::format(path, "missing BSET magic"));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::format(
            path,
            format!("unsupported version {version}"),
        ));
    }
    let (n, d) = (u32_at(bytes, 8) as usize, u32_at(bytes, 12) as usize);
    if n == 0 || d == 0 {
        return Err(Error::format(path, format!("empty shape n={n}, d={d}")));
    }
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 4 * n * d {
        return Err(Error::Integrity {
            path: path.to_path_buf(),
            declared: n * d,
            actual: payload.len() / 4,
        });
    }
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
        .collect();
    check_finite(path, d, &values)?;
    Ok(Matrix { n, d, values })
}

fn check_finite(path: &Path, d: usize, values: &[f64]) -> Result<()> {
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::data(
            path,
            format!("non-finite value at row {}, column {}", pos / d, pos % d),
        ));
    }
    Ok(())
}

pub fn parse_csv(path: &Path, text: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut d = 0;
    let mut n = 0;
    for record in reader.records() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if n == 0 {
            d = record.len();
        } else if record.len() != d {
            return Err(Error::format(
                path,
                format!("row {n} has {} columns, expected {d}", record.len()),
            ));
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::format(
                    path,
                    format!("row {n}, column {c}: `{field}` is not a number"),
                )
            })?;
            values.push(v as f32 as f64);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::format(path, "no rows"));
    }
    check_finite(path, d, &values)?;
    Ok(Matrix { n, d, values })
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    if is_csv(path) {
        parse_csv(path, &fsio::read_text(path)?)
    } else {
        decode_bset(path, &fsio::read_bytes(path)?)
    }
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    if is_csv(path) {
        let mut text = String::new();
        for row in m.values.chunks(m.d) {
            let cells: Vec<String> = row.iter().map(|v| (*v as f32).to_string()).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        fsio::write_atomic(path, text.as_bytes())
    } else {
        fsio::write_atomic(path, &encode_bset(m.n, m.d, &m.values))
    }
}

/// Reads a feature file verbatim, without normalizing rows.
pub fn load_feature_set(path: &Path, set_id: &str, identity: &str) -> Result<FeatureSet> {
    let m = read_matrix(path)?;
    Ok(FeatureSet::new(set_id, identity, m.d, m.values)?)
}

pub fn save_feature_set(path: &Path, set: &FeatureSet) -> Result<()> {
    write_matrix(
        path,
        &Matrix {
            n: set.n(),
            d: set.d(),
            values: set.as_slice().to_vec(),
        },
    )
}

/// One quality score per line; blank lines are ignored.
pub fn parse_quality(path: &Path, text: &str) -> Result<Vec<f64>> {
    text.lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|_| Error::format(path, format!("line {}: `{l}` is not a number", i + 1)))
        })
        .collect()
}

pub fn format_quality(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}\n")).collect()
}

pub fn load_quality(path: &Path) -> Result<Vec<f64>> {
    parse_quality(path, &fsio::read_text(path)?)
}

/// Stores a template as a one-row feature file.
pub fn save_representation(path: &Path, rep: &SetRepresentation) -> Result<()> {
    write_matrix(
        path,
        &Matrix {
            n: 1,
            d: rep.d(),
            values: rep.vector.clone(),
        },
    )
}

/// Loads a one-row template and renormalizes it (storage is `f32`).
pub fn load_representation(path: &Path, set_id: &str, method: &str) -> Result<SetRepresentation> {
    let m = read_matrix(path)?;
    if m.n != 1 {
        return Err(Error::format(
            path,
            format!("a representation file holds one row, found {}", m.n),
        ));
    }
    Ok(SetRepresentation::from_aggregate(
        set_id, &m.values, method,
    )?)
}
