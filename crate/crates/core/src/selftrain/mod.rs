//! Self-training with ambiguous data.
//!
//! The teacher annotates an unlabeled pool; [`partition`] splits it by
//! accumulating sorted probabilities against a threshold into confident,
//! ambiguous, and hard sets; [`tagging`] converts partition members into
//! training targets under the hard/soft/partial modes; [`pipeline`] wires
//! teacher, partition, tagging, and student training into the comparison
//! systems.

pub mod partition;
pub mod pipeline;
pub mod tagging;

pub use partition::{
    annotate, partition, AmbiguousInstance, AutoAnnotatedInstance, ConfidentInstance,
    FixedNOverflow, HardInstance, Partition, PartitionConfig, PartitionMode,
};
pub use pipeline::{run_pipeline, PipelineContext, SeedArtifacts, System, ALL_SYSTEMS};
pub use tagging::{sample_negative_label, tag, tag_human, PartitionMember, TagMode, TaggedInstance};
