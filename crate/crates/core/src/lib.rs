//! Text-dependent speaker verification scoring and evaluation.
//!
//! The pipeline gates each trial on the phrase content of its test
//! utterance (character error rate of an ASR transcript against the
//! enrolled phrase) and scores the surviving trials by cosine similarity of
//! fused multi-space speaker embeddings. Gate failures receive a punitive
//! floor score. Detection metrics (normalized min-DCF, EER, DET points) are
//! computed over labeled score sets, and [`simkit`] generates seeded
//! synthetic datasets with known ground truth.
//!
//! The math is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix it to `f64`, which is what the file formats use.

pub mod enrollfuse;
pub mod io;
pub mod metrics;
pub mod scalar;
pub mod simkit;
pub mod textgate;
pub mod types;
pub mod vector;

pub use scalar::Scalar;
pub use types::{IdError, ModelId, PhraseId, SpaceName, Trial, TrialId, TrialLabel, UtteranceId};

pub use enrollfuse::{
    build_enrollments, enroll, fuse, score_all, score_trial, IntegrityMode, SpaceOrder,
};
pub use metrics::{dcf, det_points, eer, min_dcf, select_subset, sweep, SubsetMode};
pub use textgate::{cer, edit_distance, gate, Phrase, Transcript};
pub use vector::{cosine, l2_normalize, VectorError};

pub type Embedding = vector::Embedding<f64>;
pub type Embedding32 = vector::Embedding<f32>;
pub type FusedEmbedding = enrollfuse::FusedEmbedding<f64>;
pub type EnrollmentModel = enrollfuse::EnrollmentModel<f64>;
pub type EmbeddingStore = enrollfuse::EmbeddingStore<f64>;
pub type ScoringInputs = enrollfuse::ScoringInputs<f64>;
pub type ScoreRecord = enrollfuse::ScoreRecord<f64>;
pub type ScoreBatch = enrollfuse::ScoreBatch<f64>;
pub type GateConfig = textgate::GateConfig<f64>;
pub type GateOutcome = textgate::GateOutcome<f64>;
pub type DcfParams = metrics::DcfParams<f64>;
pub type ErrorRates = metrics::ErrorRates<f64>;
pub type LabeledScores = metrics::LabeledScores<f64>;
pub type MinDcf = metrics::MinDcf<f64>;
pub type DetPoint = metrics::DetPoint<f64>;
