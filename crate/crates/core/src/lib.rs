//! Instance association and key-instance selection for unsupervised video
//! object segmentation, with region/boundary evaluation.
//!
//! Per-frame object candidates (detector masks with appearance descriptors)
//! are linked into persistent instance IDs by a weighted sum of mask overlap,
//! trajectory, and appearance cues. After the first `m` frames the pool is
//! pruned to the `k` instances with the best mix of mean saliency and
//! appearance frequency.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64` and `*32`
//! aliases below fix the scalar for convenience.
//!
//! ```
//! use keysel::{run_sequence, PipelineConfig64, SequenceInput64};
//! # fn demo(input: &SequenceInput64) -> keysel::Result<()> {
//! let result = run_sequence(input, &PipelineConfig64::default())?;
//! println!("{} frames labelled", result.frame_count());
//! # Ok(())
//! # }
//! ```

pub mod datamodel;
pub mod error;
pub mod kv;
pub mod metrics;
pub mod pipeline;
pub mod pool;
pub mod scalar;
pub mod scoring;
pub mod selection;

pub use datamodel::{
    BoundingBox, BoxVector, CandidateProposal, CandidateSource, FrameSize, InstanceId, LabelMap,
    ProvenanceRecord, RleMask, SaliencyMap, SequenceInput, SequenceResult,
};
pub use error::{Error, Result};
pub use metrics::{evaluate, SequenceReport};
pub use pipeline::{run_sequence, run_sequence_with, PipelineConfig, Tracker};
pub use pool::{ObjectPool, PoolConfig, TrackedInstance};
pub use scalar::Scalar;
pub use scoring::{ScoreMatrix, ScoreWeights};
pub use selection::{SelectionMode, SelectionWeights};

pub type BoundingBox64 = BoundingBox<f64>;
pub type BoxVector64 = BoxVector<f64>;
pub type CandidateProposal64 = CandidateProposal<f64>;
pub type SaliencyMap64 = SaliencyMap<f64>;
pub type SequenceInput64 = SequenceInput<f64>;
pub type SequenceResult64 = SequenceResult<f64>;
pub type PipelineConfig64 = PipelineConfig<f64>;
pub type SequenceReport64 = SequenceReport<f64>;
pub type ScoreWeights64 = ScoreWeights<f64>;
pub type ScoreMatrix64 = ScoreMatrix<f64>;
pub type TrackedInstance64 = TrackedInstance<f64>;
pub type ObjectPool64 = ObjectPool<f64>;

pub type BoundingBox32 = BoundingBox<f32>;
pub type BoxVector32 = BoxVector<f32>;
pub type CandidateProposal32 = CandidateProposal<f32>;
pub type SaliencyMap32 = SaliencyMap<f32>;
pub type SequenceInput32 = SequenceInput<f32>;
pub type SequenceResult32 = SequenceResult<f32>;
pub type PipelineConfig32 = PipelineConfig<f32>;
pub type SequenceReport32 = SequenceReport<f32>;
pub type ScoreWeights32 = ScoreWeights<f32>;
pub type ScoreMatrix32 = ScoreMatrix<f32>;
pub type TrackedInstance32 = TrackedInstance<f32>;
pub type ObjectPool32 = ObjectPool<f32>;
