//! Detection and suppression of burstiness in sets of embedding vectors.
//!
//! A set of per-element embeddings is often dominated by a few near-duplicate
//! patterns. This crate measures that redundancy and counteracts it:
//!
//! - [`burst`]: cosine gram matrix, self-similarity, generalized max-pooling
//!   (GMP) and quality-aware GMP weights, set burst degree.
//! - [`quickshift`]: Quickshift++ mode seeking to split a set into groups.
//! - [`sampling`]: sampling distributions that favor rare elements, and
//!   seeded instance drawing.
//! - [`aggregate`]: attention-weighted, burst-weighted and two-stage set
//!   templates.
//! - [`eval`]: ROC / TAR@FAR, rank-N and TPIR@FPIR, bursty-subset selection.
//! - [`synth`]: deterministic benchmarks with planted modes and quality.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel batch processing live in the `burstset` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod aggregate;
pub mod burst;
pub mod error;
pub mod eval;
pub mod linalg;
mod math;
pub mod protocol;
pub mod quickshift;
pub mod sampling;
pub mod set;
pub mod synth;

pub use error::{Error, Result};
pub use math::{distance, dot, norm, sigmoid, unit};
pub use protocol::{EvalProtocol, IdentificationEntry, PairLabel, VerificationPair};
pub use quickshift::{GroupPartition, KnnGraph};
pub use set::{FeatureSet, HyperParams, SetRepresentation, WeightKind, WeightVector};
