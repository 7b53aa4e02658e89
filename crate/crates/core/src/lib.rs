//! Speaker verification benchmarking on conversational transcripts with
//! controlled topic confounds.
//!
//! The crate covers the whole pipeline: corpus ingestion and synthesis,
//! transcript normalization, trial construction at three topic-control
//! levels, baseline scorers, a small MLP verification head, and evaluation
//! with bootstrap intervals and paired significance tests.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod head;
pub mod normalize;
pub mod scoring;
pub mod trials;

pub use error::{Error, Result};
