//! STAD: self-training with ambiguous data for low-resource relation
//! classification.
//!
//! A teacher trained on a small human-labeled set annotates unlabeled
//! data; instances are partitioned by accumulated probability mass into
//! confident, ambiguous, and hard sets. Confident instances get hard
//! pseudo-labels; ambiguous ones keep their candidate set as a partial
//! label and are trained through negatives sampled from outside it; hard
//! ones are discarded. The crate provides the corpus and feature layer,
//! the linear softmax model with the unified positive/negative loss, the
//! partitioning and tagging machinery, the evaluation harness, and a
//! synthetic corpus generator for end-to-end experiments.

pub mod config;
pub mod corpus;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod model;
pub mod selftrain;
pub mod synth;
pub mod util;

pub use error::{CoreError, Result};
