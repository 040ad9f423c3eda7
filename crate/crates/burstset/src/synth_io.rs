//! Synthetic benchmark config (`key = value` lines) and on-disk layout.
//!
//! A benchmark directory holds
//!
//! ```text
//! manifest.csv          set_id,identity,features,quality
//! features/<set>.bset   stored rows (unit direction scaled by quality)
//! quality/<set>.txt     one quality score per element
//! pairs.csv             verification protocol
//! identification.csv    identification protocol
//! truth.csv             set_id,identity,redundancy,mode_labels
//! synth.conf            the config that produced it
//! ```

use std::path::{Path, PathBuf};

use burstset_core::synth::{Benchmark, SetTruth, SynthConfig};

use crate::error::{Error, Result};
use crate::features::{format_quality, save_feature_set};
use crate::fsio;
use crate::manifest::{format_manifest, ManifestEntry};
use crate::protocol_io::{format_identification, format_pairs};

pub const MANIFEST: &str = "manifest.csv";
pub const PAIRS: &str = "pairs.csv";
pub const IDENTIFICATION: &str = "identification.csv";
pub const TRUTH: &str = "truth.csv";
pub const CONFIG: &str = "synth.conf";

fn config_err(reason: String) -> Error {
    burstset_core::Error::Config(reason).into()
}

/// Parses `key = value` lines over the defaults. `#` starts a comment.
pub fn parse_config(text: &str) -> Result<SynthConfig> {
    let mut c = SynthConfig::default();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected `key = value`", no + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| {
            config_err(format!(
                "line {}: `{key}` expects {what}, got `{value}`",
                no + 1
            ))
        };
        let count = || value.parse::<usize>().map_err(|_| bad("a count"));
        let real = || value.parse::<f64>().map_err(|_| bad("a number"));
        match key {
            "identities" => c.identities = count()?,
            "sets_per_identity" => c.sets_per_identity = count()?,
            "set_size" => c.set_size = count()?,
            "d" => c.d = count()?,
            "modes_per_identity" => c.modes_per_identity = count()?,
            "mode_cardinality_skew" => c.mode_cardinality_skew = real()?,
            "mode_spread" => c.mode_spread = real()?,
            "intra_mode_noise" => c.intra_mode_noise = real()?,
            "quality_noise_link" => c.quality_noise_link = real()?,
            "seed" => c.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            other => {
                return Err(config_err(format!(
                    "line {}: unknown key `{other}`",
                    no + 1
                )))
            }
        }
    }
    c.validate()?;
    Ok(c)
}

pub fn format_config(c: &SynthConfig) -> String {
    format!(
        "identities = {}\nsets_per_identity = {}\nset_size = {}\nd = {}\n\
         modes_per_identity = {}\nmode_cardinality_skew = {}\nmode_spread = {}\n\
         intra_mode_noise = {}\nquality_noise_link = {}\nseed = {}\n",
        c.identities,
        c.sets_per_identity,
        c.set_size,
        c.d,
        c.modes_per_identity,
        c.mode_cardinality_skew,
        c.mode_spread,
        c.intra_mode_noise,
        c.quality_noise_link,
        c.seed
    )
}

pub fn format_truth(truth: &[SetTruth]) -> String {
    let mut out = String::from("set_id,identity,redundancy,mode_labels\n");
    for t in truth {
        let labels: Vec<String> = t.mode_labels.iter().map(usize::to_string).collect();
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.set_id,
            t.identity,
            t.redundancy,
            labels.join(" ")
        ));
    }
    out
}

pub fn parse_truth(path: &Path, text: &str) -> Result<Vec<SetTruth>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "set_id,identity,redundancy,mode_labels" => {}
        _ => return Err(Error::format(path, "missing truth header")),
    }
    lines
        .map(|(no, line)| {
            let bad = |what: &str| Error::format(path, format!("line {}: {what}", no + 1));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            Ok(SetTruth {
                set_id: f[0].into(),
                identity: f[1].into(),
                redundancy: f[2].parse().map_err(|_| bad("bad redundancy"))?,
                mode_labels: f[3]
                    .split_whitespace()
                    .map(|l| l.parse().map_err(|_| bad("bad mode label")))
                    .collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// Writes a generated benchmark under `dir`; returns the manifest path.
pub fn write_benchmark(dir: &Path, config: &SynthConfig, bench: &Benchmark) -> Result<PathBuf> {
    fsio::create_dir(dir)?;
    let mut entries = Vec::with_capacity(bench.sets.len());
    for set in &bench.sets {
        let features = PathBuf::from("features").join(format!("{}.bset", set.set_id()));
        let quality = PathBuf::from("quality").join(format!("{}.txt", set.set_id()));
        save_feature_set(&dir.join(&features), set)?;
        let q = set.quality().ok_or_else(|| {
            Error::Usage(format!("generated set `{}` lacks quality", set.set_id()))
        })?;
        fsio::write_atomic(&dir.join(&quality), format_quality(q).as_bytes())?;
        entries.push(ManifestEntry {
            set_id: set.set_id().into(),
            identity: set.identity().into(),
            features,
            quality: Some(quality),
        });
    }
    let manifest = dir.join(MANIFEST);
    fsio::write_atomic(&manifest, format_manifest(&entries)?.as_bytes())?;
    fsio::write_atomic(
        &dir.join(PAIRS),
        format_pairs(&bench.protocol.pairs).as_bytes(),
    )?;
    fsio::write_atomic(
        &dir.join(IDENTIFICATION),
        format_identification(&bench.protocol.identification).as_bytes(),
    )?;
    fsio::write_atomic(&dir.join(TRUTH), format_truth(&bench.truth).as_bytes())?;
    fsio::write_atomic(&dir.join(CONFIG), format_config(config).as_bytes())?;
    Ok(manifest)
}
