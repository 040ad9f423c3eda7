//! Manifest CSV with header `set_id,identity,features,quality`.
//!
//! Paths are resolved relative to the manifest's directory. `quality` may be
//! left empty.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use burstset_core::FeatureSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{load_feature_set, load_quality};
use crate::fsio;

pub const HEADER: [&str; 4] = ["set_id", "identity", "features", "quality"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub set_id: String,
    pub identity: String,
    pub features: PathBuf,
    pub quality: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Serialize)]
struct Row {
    set_id: String,
    identity: String,
    features: String,
    quality: Option<String>,
}

fn manifest_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Manifest {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Parses manifest text; `base` is the directory relative paths hang off.
pub fn parse_manifest(path: &Path, text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| manifest_err(path, e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names.len() < 3
        || names[..3] != HEADER[..3]
        || (names.len() == 4 && names[3] != HEADER[3])
        || names.len() > 4
    {
        return Err(manifest_err(
            path,
            format!(
                "header must be `{}`, found `{}`",
                HEADER.join(","),
                names.join(",")
            ),
        ));
    }
    let mut seen = BTreeSet::new();
    let mut entries = Vec::new();
    for (line, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| manifest_err(path, format!("row {}: {e}", line + 1)))?;
        if row.set_id.is_empty() || row.features.is_empty() {
            return Err(manifest_err(
                path,
                format!("row {}: empty set_id or features", line + 1),
            ));
        }
        if !seen.insert(row.set_id.clone()) {
            return Err(manifest_err(
                path,
                format!("duplicate set_id `{}`", row.set_id),
            ));
        }
        entries.push(ManifestEntry {
            features: base.join(&row.features),
            quality: row.quality.filter(|q| !q.is_empty()).map(|q| base.join(q)),
            set_id: row.set_id,
            identity: row.identity,
        });
    }
    Ok(entries)
}

/// Reads and validates a manifest, checking that every referenced file exists.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fsio::read_text(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let entries = parse_manifest(path, &text, base)?;
    for e in &entries {
        let files = std::iter::once(("feature file", &e.features))
            .chain(e.quality.as_ref().map(|q| ("quality file", q)));
        for (what, target) in files {
            if !target.is_file() {
                return Err(Error::Resolve {
                    manifest: path.to_path_buf(),
                    what,
                    target: target.clone(),
                });
            }
        }
    }
    Ok(entries)
}

/// Serializes entries, writing paths as given (callers pass them relative to
/// the manifest's directory).
pub fn format_manifest(entries: &[ManifestEntry]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for e in entries {
        w.serialize(Row {
            set_id: e.set_id.clone(),
            identity: e.identity.clone(),
            features: e.features.to_string_lossy().into_owned(),
            quality: e.quality.as_ref().map(|q| q.to_string_lossy().into_owned()),
        })
        .map_err(|e| Error::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn load_entry(entry: &ManifestEntry) -> Result<FeatureSet> {
    let load = || -> Result<FeatureSet> {
        let set = load_feature_set(&entry.features, &entry.set_id, &entry.identity)?;
        match &entry.quality {
            Some(q) => Ok(set.with_quality(load_quality(q)?)?),
            None => Ok(set),
        }
    };
    load().map_err(|e| Error::in_set(&entry.set_id, e))
}

/// Loads every set in manifest order, in parallel.
pub fn load_sets(entries: &[ManifestEntry]) -> Result<Vec<FeatureSet>> {
    entries.par_iter().map(load_entry).collect()
}
