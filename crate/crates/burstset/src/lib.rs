//! File formats, batch commands and the `burstset` CLI on top of
//! `burstset-core`.
//!
//! - [`features`]: the `BSET` binary matrix format, CSV matrices, quality
//!   sidecars and stored templates.
//! - [`manifest`]: set lists with paths relative to the manifest.
//! - [`protocol_io`], [`records`], [`synth_io`]: protocol, per-set record and
//!   benchmark files.
//! - [`methods`]: detection, sampling, aggregation and evaluation over loaded
//!   sets, parallel across sets.
//! - [`cli`]: the command-line surface.

pub mod cli;
pub mod config;
pub mod error;
pub mod features;
pub mod fsio;
pub mod manifest;
pub mod methods;
pub mod protocol_io;
pub mod records;
pub mod synth_io;

pub use error::{Error, Result};
