//! Sampling from random quantum circuits by contracting tensor networks.
//!
//! The pipeline: build a circuit's network with some outputs left open,
//! plan and slice its contraction, keep only the heaviest slices of a few
//! early wires, and feed the resulting amplitude batches to a rejection
//! sampler. Cross-entropy scoring, spoofing, and a dense reference simulator
//! are included for checking the results.

// NaN-rejecting argument checks are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
pub mod circuit;
pub mod error;
pub mod fidelity;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod tensornet;
pub mod treeopt;
pub mod xeb;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
