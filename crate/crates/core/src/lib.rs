//! Topology-preserving error-bounded lossy compression for 2D/3D scalar
//! fields.
//!
//! The compressor pairs a Lorenzo-predicting quantization codec with
//! per-vertex admissible ranges derived from the persistence-simplified
//! contour tree. After each encode it rebuilds the tree of the decoded
//! field, compares branch decompositions, and tightens the ranges around any
//! false positive, false negative or false type until none remain.

pub mod bounds;
pub mod codec;
pub mod field;
pub mod metrics;
pub mod pipeline;
pub mod topology;
mod union_find;
pub mod validate;

pub use bounds::BoundsField;
pub use codec::{CompressedStream, QuantizationConfig};
pub use field::{Dims, ScalarField, VertexId};
pub use pipeline::{compress, decompress, PipelineConfig};
pub use topology::{build_contour_tree, ContourTree};
pub use validate::{detect_false_cases, FalseCaseReport};
