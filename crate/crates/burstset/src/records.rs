//! Per-set CSV records: weight vectors, group partitions and drawn instances.
//!
//! Weights are written with Rust's shortest round-trip float formatting, so
//! reading a file back reproduces the exact `f64` values.

use std::path::Path;

use burstset_core::sampling::Instance;
use burstset_core::{GroupPartition, WeightKind, WeightVector};

use crate::error::{Error, Result};

pub fn format_weights(w: &WeightVector) -> String {
    let mut out = format!("# kind={}\nindex,value\n", w.kind());
    for (i, v) in w.values().iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses `index,value` rows, requiring indices `0, 1, 2, ...` in order.
fn indexed_rows<'a>(
    path: &Path,
    lines: impl Iterator<Item = (usize, &'a str)>,
    header: &str,
) -> Result<Vec<&'a str>> {
    let mut lines = lines;
    match lines.next() {
        Some((_, h)) if h == header => {}
        Some((no, h)) => {
            return Err(Error::format(
                path,
                format!("line {no}: expected header `{header}`, found `{h}`"),
            ))
        }
        None => return Err(Error::format(path, format!("missing header `{header}`"))),
    }
    let mut values = Vec::new();
    for (no, line) in lines {
        let (idx, value) = line
            .split_once(',')
            .ok_or_else(|| Error::format(path, format!("line {no}: expected two fields")))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| Error::format(path, format!("line {no}: bad index `{idx}`")))?;
        if idx != values.len() {
            return Err(Error::format(
                path,
                format!(
                    "line {no}: index {idx} out of sequence, expected {}",
                    values.len()
                ),
            ));
        }
        values.push(value.trim());
    }
    Ok(values)
}

pub fn parse_weights(path: &Path, text: &str) -> Result<WeightVector> {
    let mut lines = data_lines(text);
    let kind: WeightKind = match lines.next() {
        Some((_, l)) if l.starts_with("# kind=") => l["# kind=".len()..].trim().parse()?,
        _ => return Err(Error::format(path, "first line must be `# kind=<kind>`")),
    };
    let values = indexed_rows(path, lines, "index,value")?
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.parse::<f64>()
                .map_err(|_| Error::format(path, format!("index {i}: `{v}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    WeightVector::new(kind, values).map_err(|e| Error::data(path, e.to_string()))
}

pub fn format_partition(p: &GroupPartition) -> String {
    let mut out = String::from("index,group\n");
    for (i, g) in p.assignments().iter().enumerate() {
        out.push_str(&format!("{i},{g}\n"));
    }
    out
}

pub fn parse_partition(path: &Path, text: &str) -> Result<GroupPartition> {
    let groups = indexed_rows(path, data_lines(text), "index,group")?
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            g.parse::<usize>()
                .map_err(|_| Error::format(path, format!("index {i}: bad group `{g}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    GroupPartition::new(groups).map_err(|e| Error::data(path, e.to_string()))
}

/// Header `set_id,idx0,...,idx{n_t-1}` followed by one row per instance.
pub fn format_instances(instances: &[Instance], n_t: usize) -> String {
    let mut out = String::from("set_id");
    for j in 0..n_t {
        out.push_str(&format!(",idx{j}"));
    }
    out.push('\n');
    for inst in instances {
        out.push_str(&inst.set_id);
        for i in &inst.indices {
            out.push_str(&format!(",{i}"));
        }
        out.push('\n');
    }
    out
}

pub fn parse_instances(path: &Path, text: &str) -> Result<Vec<Instance>> {
    let mut lines = data_lines(text);
    let n_t = match lines.next() {
        Some((_, h)) if h.starts_with("set_id") => h.split(',').count() - 1,
        _ => return Err(Error::format(path, "missing `set_id,idx0,...` header")),
    };
    lines
        .map(|(no, line)| {
            let mut fields = line.split(',').map(str::trim);
            let set_id = fields.next().unwrap_or_default().to_string();
            let indices = fields
                .map(|f| {
                    f.parse::<usize>()
                        .map_err(|_| Error::format(path, format!("line {no}: bad index `{f}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if indices.len() != n_t {
                return Err(Error::format(
                    path,
                    format!(
                        "line {no}: {} indices, header declares {n_t}",
                        indices.len()
                    ),
                ));
            }
            Ok(Instance { set_id, indices })
        })
        .collect()
}
