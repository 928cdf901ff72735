//! Desk-scale study of what per-speaker fine-tuning writes into model weights.
//!
//! A generic dense surrogate acoustic model is fine-tuned once per speaker and
//! session on synthetic frame data. The resulting weight changes are then mined
//! for personal information along two routes:
//!
//! * per-layer agglomerative clustering (Euclidean distance, Ward linkage)
//!   scored with purity against gender labels, and
//! * a multi-stream embedding extractor trained on per-unit weight blocks and
//!   scored as a speaker-verification task (cosine similarity, equal error
//!   rate).
//!
//! Everything is seeded: the same seed reproduces corpora, trained weights,
//! clusterings and scores bit for bit. No global state, no environment
//! variables; randomness flows only through explicit seeds.

pub mod cluster;
pub mod corpus;
pub mod extractor;
pub mod matrix;
pub mod nn;
pub mod personalize;
pub mod seed;
pub mod verify;
pub mod weight_features;

mod error;

pub use error::{Error, Result};
pub use matrix::Matrix;
