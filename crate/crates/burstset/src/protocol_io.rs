//! Protocol CSVs: verification pairs `a,b,label` and identification rows
//! `probe,gallery_flag,identity`.

use std::path::Path;

use burstset_core::{EvalProtocol, IdentificationEntry, PairLabel, VerificationPair};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsio;

#[derive(Debug, Deserialize, Serialize)]
struct PairRow {
    a: String,
    b: String,
    label: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct IdentRow {
    probe: String,
    gallery_flag: String,
    identity: String,
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn parse_flag(path: &Path, row: usize, s: &str) -> Result<bool> {
    match s {
        "1" | "true" | "gallery" => Ok(true),
        "0" | "false" | "probe" => Ok(false),
        other => Err(Error::format(
            path,
            format!("row {row}: gallery_flag `{other}` is not 0 or 1"),
        )),
    }
}

pub fn parse_pairs(path: &Path, text: &str) -> Result<Vec<VerificationPair>> {
    let mut out = Vec::new();
    for (i, row) in reader(text).deserialize::<PairRow>().enumerate() {
        let row = row.map_err(|e| Error::format(path, format!("row {}: {e}", i + 1)))?;
        let label: PairLabel = row
            .label
            .parse()
            .map_err(|e| Error::format(path, format!("row {}: {e}", i + 1)))?;
        out.push(VerificationPair {
            a: row.a,
            b: row.b,
            label,
        });
    }
    Ok(out)
}

pub fn parse_identification(path: &Path, text: &str) -> Result<Vec<IdentificationEntry>> {
    let mut out = Vec::new();
    for (i, row) in reader(text).deserialize::<IdentRow>().enumerate() {
        let row = row.map_err(|e| Error::format(path, format!("row {}: {e}", i + 1)))?;
        out.push(IdentificationEntry {
            gallery: parse_flag(path, i + 1, &row.gallery_flag)?,
            set_id: row.probe,
            identity: row.identity,
        });
    }
    Ok(out)
}

fn to_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .expect("serializing plain string rows cannot fail");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is UTF-8")
}

pub fn format_pairs(pairs: &[VerificationPair]) -> String {
    let rows = pairs.iter().map(|p| PairRow {
        a: p.a.clone(),
        b: p.b.clone(),
        label: p.label.as_str().into(),
    });
    let text = to_string(rows);
    if pairs.is_empty() {
        "a,b,label\n".into()
    } else {
        text
    }
}

pub fn format_identification(entries: &[IdentificationEntry]) -> String {
    let rows = entries.iter().map(|e| IdentRow {
        probe: e.set_id.clone(),
        gallery_flag: if e.gallery { "1" } else { "0" }.into(),
        identity: e.identity.clone(),
    });
    let text = to_string(rows);
    if entries.is_empty() {
        "probe,gallery_flag,identity\n".into()
    } else {
        text
    }
}

/// Loads whichever protocol files are given; a missing file leaves that half
/// of the protocol empty.
pub fn load_protocol(pairs: Option<&Path>, identification: Option<&Path>) -> Result<EvalProtocol> {
    let mut protocol = EvalProtocol::default();
    if let Some(p) = pairs {
        protocol.pairs = parse_pairs(p, &fsio::read_text(p)?)?;
    }
    if let Some(p) = identification {
        protocol.identification = parse_identification(p, &fsio::read_text(p)?)?;
    }
    Ok(protocol)
}
