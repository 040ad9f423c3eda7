//! The configuration echoed as `run_config.json` into every output directory.
//!
//! The output directory itself is not recorded: a run is reproduced by
//! replaying the file with any `--out`.

use std::path::{Path, PathBuf};

use burstset_core::HyperParams;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsio;
use crate::methods::{EvalTargets, QualityChoice};

pub const RUN_CONFIG: &str = "run_config.json";

/// Serializable mirror of [`HyperParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub lambda: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub n_t: usize,
    pub k: Option<usize>,
    pub beta: f64,
}

impl From<HyperParams> for ParamsConfig {
    fn from(p: HyperParams) -> Self {
        ParamsConfig {
            lambda: p.lambda,
            lambda1: p.lambda1,
            lambda2: p.lambda2,
            lambda3: p.lambda3,
            lambda4: p.lambda4,
            n_t: p.n_t,
            k: p.k,
            beta: p.beta,
        }
    }
}

impl From<ParamsConfig> for HyperParams {
    fn from(p: ParamsConfig) -> Self {
        HyperParams {
            lambda: p.lambda,
            lambda1: p.lambda1,
            lambda2: p.lambda2,
            lambda3: p.lambda3,
            lambda4: p.lambda4,
            n_t: p.n_t,
            k: p.k,
            beta: p.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub manifest: Option<PathBuf>,
    pub reps: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub identification: Option<PathBuf>,
    pub method: Option<String>,
    pub quality: Option<QualityChoice>,
    pub params: Option<ParamsConfig>,
    pub seed: Option<u64>,
    pub instances: Option<usize>,
    pub targets: Option<EvalTargets>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.into(),
            manifest: None,
            reps: None,
            pairs: None,
            identification: None,
            method: None,
            quality: None,
            params: None,
            seed: None,
            instances: None,
            targets: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("run config serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fsio::write_atomic(&dir.join(RUN_CONFIG), self.to_json().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fsio::read_text(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }
}
