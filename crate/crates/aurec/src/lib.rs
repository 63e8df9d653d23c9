//! Facial action unit recognition from phoneme segment streams on top of `ctbn`.

pub mod alphabet;
pub mod codec;
pub mod eval;
pub mod labels;
pub mod models;
pub mod recognize;
pub mod segments;
pub mod synthetic;
pub mod training;

use thiserror::Error;

pub use alphabet::PhonemeAlphabet;
pub use codec::{AuCodec, AuSet};
pub use models::{
    build_factorized_model, build_joint_model, describe_model, ModelForm, PipelineShape, AU_NODE, OBSERVATION_NODE, PHONE_NODE,
};

use ctbn::inference::InferenceError;
use ctbn::learning::LearnError;
use ctbn::model::ModelError;
use ctbn::trajectory::TrajectoryError;

/// Default evaluation frame rate (video frames per second).
pub const DEFAULT_FRAME_RATE: f64 = 59.94;

#[derive(Debug, Error)]
pub enum AurecError {
    #[error("AU state {index} out of range (0..{bound})")]
    OutOfRange { index: usize, bound: usize },
    #[error("unknown action unit `{0}`")]
    UnknownAuName(String),
    #[error("line {line}: unknown phoneme `{label}`")]
    UnknownPhoneme { line: usize, label: String },
    #[error("line {line}: segment overlaps the previous one")]
    OverlappingSegments { line: usize },
    #[error("line {line}: segment has non-positive duration")]
    NegativeDuration { line: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("invalid AU codec: {0}")]
    InvalidCodec(String),
    #[error("model does not fit the pipeline: {0}")]
    ModelShape(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}
