//! Geometry-aware differential privacy for quantum embeddings.
//!
//! The crate simulates small qubit registers exactly, computes quantum Fisher
//! information (QFI) spectra of data embeddings, derives noise mechanisms and
//! privacy accounting from those spectra, runs adversarial analyses, and
//! produces a Merkle-committed audit trail of per-sample privacy costs.

// `!(x > 0.0)` is used on purpose so NaN is rejected along with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adversary;
pub mod audit;
pub mod embed;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mech;
pub mod numfmt;
pub mod qfi;
pub mod qstate;
pub mod rng;

pub use error::{Error, Result};
