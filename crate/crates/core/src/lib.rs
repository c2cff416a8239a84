//! Degree-aware knowledge graph embedding: DistMult and TuckER training with
//! same-tail mixup augmentation for low tail-relation degree triples, baselines,
//! filtered ranking evaluation, calibration and embedding analysis.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod benchgen;
pub mod cli;
pub mod degree;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod kv;
pub mod models;
pub mod numerics;
pub mod training;

pub use error::{Error, Result};
