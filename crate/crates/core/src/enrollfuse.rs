//! Enrollment models, multi-space embedding fusion and trial scoring.
//!
//! Each model space (one embedding extractor) is unit-normalized on its own
//! and the blocks are concatenated in a declared space order with weight 1.
//! For unit blocks the cosine of two fused vectors is the mean of the
//! per-space cosines, so any uniform block weight gives the same scores.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::scalar::Scalar;
use crate::textgate::{gate, GateConfig, GateOutcome, Phrase, TextGateError, Transcript};
use crate::types::{ModelId, PhraseId, SpaceName, Trial, TrialId, TrialLabel, UtteranceId};
use crate::vector::{self, l2_normalize, Embedding, VectorError};

/// Number of repetitions an enrollment is built from.
pub const REPETITIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuseError {
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error("expected {REPETITIONS} repetitions, got {0}")]
    RepCount(usize),
    #[error("fusion needs at least one model space")]
    NoSpaces,
    #[error("fused block layouts differ: {left:?} vs {right:?}")]
    LayoutMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("centroid for space {0} is not unit norm")]
    NotUnitNorm(SpaceName),
}

impl FuseError {
    pub fn class(&self) -> &'static str {
        match self {
            FuseError::Vector(e) => e.class(),
            FuseError::RepCount(_) => "BadRepCount",
            FuseError::NoSpaces => "NoSpaces",
            FuseError::LayoutMismatch { .. } => "DimensionMismatch",
            FuseError::NotUnitNorm(_) => "NotUnitNorm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("trial references unknown enrollment model {0}")]
    MissingModel(ModelId),
    #[error("no embedding for utterance {utt} in space {space}")]
    MissingSpace { space: SpaceName, utt: UtteranceId },
    #[error("phrase {0} is not in the phrase table")]
    MissingPhrase(PhraseId),
    #[error("no transcript for test utterance {0}")]
    MissingTranscript(UtteranceId),
    #[error("duplicate trial id {0}")]
    DuplicateTrial(TrialId),
    #[error("enrollment {model} has no centroid for space {space}")]
    MissingCentroid { model: ModelId, space: SpaceName },
    #[error(transparent)]
    Fuse(#[from] FuseError),
    #[error(transparent)]
    Gate(#[from] TextGateError),
}

impl From<VectorError> for ScoreError {
    fn from(e: VectorError) -> Self {
        ScoreError::Fuse(FuseError::Vector(e))
    }
}

impl ScoreError {
    pub fn class(&self) -> &'static str {
        match self {
            ScoreError::MissingModel(_) => "MissingModel",
            ScoreError::MissingSpace { .. } => "MissingSpace",
            ScoreError::MissingPhrase(_) => "MissingPhrase",
            ScoreError::MissingTranscript(_) => "MissingTranscript",
            ScoreError::DuplicateTrial(_) => "DuplicateTrial",
            ScoreError::MissingCentroid { .. } => "MissingSpace",
            ScoreError::Fuse(e) => e.class(),
            ScoreError::Gate(e) => e.class(),
        }
    }
}

fn unit_tolerance<T: Scalar>() -> T {
    T::epsilon() * T::lit(64.0)
}

/// Builds a speaker centroid: the normalized mean of the normalized repetitions.
pub fn enroll<T: Scalar>(reps: &[Embedding<T>]) -> Result<Embedding<T>, FuseError> {
    if reps.len() != REPETITIONS {
        return Err(FuseError::RepCount(reps.len()));
    }
    let dim = reps[0].dim();
    let mut sum = vec![T::zero(); dim];
    for rep in reps {
        if rep.dim() != dim {
            return Err(VectorError::DimensionMismatch {
                left: dim,
                right: rep.dim(),
            }
            .into());
        }
        let unit = l2_normalize(rep)?;
        for (s, &v) in sum.iter_mut().zip(unit.values()) {
            *s = *s + v;
        }
    }
    let n = T::from_count(REPETITIONS);
    let mean = Embedding::new(sum.into_iter().map(|s| s / n).collect())?;
    Ok(l2_normalize(&mean)?)
}

/// Concatenation of per-space unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedEmbedding<T: Scalar = f64> {
    values: Vec<T>,
    dims: Vec<usize>,
}

impl<T: Scalar> FusedEmbedding<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Slice of the fused vector belonging to space `index`.
    pub fn block(&self, index: usize) -> &[T] {
        let start: usize = self.dims[..index].iter().sum();
        &self.values[start..start + self.dims[index]]
    }

    pub fn cosine(&self, other: &Self) -> Result<T, FuseError> {
        if self.dims != other.dims {
            return Err(FuseError::LayoutMismatch {
                left: self.dims.clone(),
                right: other.dims.clone(),
            });
        }
        Ok(vector::cosine_slices(&self.values, &other.values)?)
    }
}

pub fn fuse<T: Scalar>(per_space: &[Embedding<T>]) -> Result<FusedEmbedding<T>, FuseError> {
    if per_space.is_empty() {
        return Err(FuseError::NoSpaces);
    }
    let mut values = Vec::with_capacity(per_space.iter().map(Embedding::dim).sum());
    let mut dims = Vec::with_capacity(per_space.len());
    for v in per_space {
        values.extend_from_slice(l2_normalize(v)?.values());
        dims.push(v.dim());
    }
    Ok(FusedEmbedding { values, dims })
}

/// Declared order of model spaces; enrollment and test vectors are fused in
/// this order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceOrder(Vec<SpaceName>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceOrderError {
    #[error("space order is empty")]
    Empty,
    #[error("space {0} declared twice")]
    Duplicate(SpaceName),
}

impl SpaceOrder {
    pub fn new(spaces: Vec<SpaceName>) -> Result<Self, SpaceOrderError> {
        if spaces.is_empty() {
            return Err(SpaceOrderError::Empty);
        }
        let mut seen = BTreeSet::new();
        for s in &spaces {
            if !seen.insert(s) {
                return Err(SpaceOrderError::Duplicate(s.clone()));
            }
        }
        Ok(Self(spaces))
    }

    pub fn spaces(&self) -> &[SpaceName] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-space embedding tables keyed by utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore<T: Scalar = f64> {
    spaces: BTreeMap<SpaceName, BTreeMap<UtteranceId, Embedding<T>>>,
}

impl<T: Scalar> Default for EmbeddingStore<T> {
    fn default() -> Self {
        Self {
            spaces: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> EmbeddingStore<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_space(&mut self, space: SpaceName, table: BTreeMap<UtteranceId, Embedding<T>>) {
        self.spaces.insert(space, table);
    }

    pub fn space(&self, space: &SpaceName) -> Option<&BTreeMap<UtteranceId, Embedding<T>>> {
        self.spaces.get(space)
    }

    pub fn get(&self, space: &SpaceName, utt: &UtteranceId) -> Option<&Embedding<T>> {
        self.spaces.get(space)?.get(utt)
    }

    /// Embeddings of `utt` in every declared space, in order.
    pub fn per_space(
        &self,
        order: &SpaceOrder,
        utt: &UtteranceId,
    ) -> Result<BTreeMap<SpaceName, Embedding<T>>, ScoreError> {
        order
            .spaces()
            .iter()
            .map(|space| {
                self.get(space, utt)
                    .map(|e| (space.clone(), e.clone()))
                    .ok_or_else(|| ScoreError::MissingSpace {
                        space: space.clone(),
                        utt: utt.clone(),
                    })
            })
            .collect()
    }
}

/// One line of an enrollment map: the model, its phrase and its repetitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrollEntry {
    pub model_id: ModelId,
    pub phrase_id: PhraseId,
    pub rep_ids: [UtteranceId; REPETITIONS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnrollmentModel<T: Scalar = f64> {
    model_id: ModelId,
    phrase_id: PhraseId,
    rep_ids: [UtteranceId; REPETITIONS],
    centroids: BTreeMap<SpaceName, Embedding<T>>,
}

impl<T: Scalar> EnrollmentModel<T> {
    /// Wraps precomputed centroids, which must be unit norm.
    pub fn new(
        model_id: ModelId,
        phrase_id: PhraseId,
        rep_ids: [UtteranceId; REPETITIONS],
        centroids: BTreeMap<SpaceName, Embedding<T>>,
    ) -> Result<Self, FuseError> {
        for (space, c) in &centroids {
            if (c.norm() - T::one()).abs() > unit_tolerance() {
                return Err(FuseError::NotUnitNorm(space.clone()));
            }
        }
        Ok(Self {
            model_id,
            phrase_id,
            rep_ids,
            centroids,
        })
    }

    /// Enrolls every declared space from the repetition embeddings in `store`.
    pub fn build(
        entry: &EnrollEntry,
        store: &EmbeddingStore<T>,
        order: &SpaceOrder,
    ) -> Result<Self, ScoreError> {
        let mut centroids = BTreeMap::new();
        for space in order.spaces() {
            let reps = entry
                .rep_ids
                .iter()
                .map(|id| {
                    store.get(space, id).cloned().ok_or_else(|| ScoreError::MissingSpace {
                        space: space.clone(),
                        utt: id.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            centroids.insert(space.clone(), enroll(&reps)?);
        }
        Ok(Self {
            model_id: entry.model_id.clone(),
            phrase_id: entry.phrase_id.clone(),
            rep_ids: entry.rep_ids.clone(),
            centroids,
        })
    }

    pub fn model_id(&self) -> &ModelId {
        &self.model_id
    }

    pub fn phrase_id(&self) -> &PhraseId {
        &self.phrase_id
    }

    pub fn rep_ids(&self) -> &[UtteranceId; REPETITIONS] {
        &self.rep_ids
    }

    pub fn centroid(&self, space: &SpaceName) -> Option<&Embedding<T>> {
        self.centroids.get(space)
    }

    pub fn fused(&self, order: &SpaceOrder) -> Result<FusedEmbedding<T>, ScoreError> {
        let blocks = order
            .spaces()
            .iter()
            .map(|s| {
                self.centroids
                    .get(s)
                    .cloned()
                    .ok_or_else(|| ScoreError::MissingCentroid {
                        model: self.model_id.clone(),
                        space: s.clone(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(fuse(&blocks)?)
    }
}

/// Final score of one trial. A failed gate always carries the punitive score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord<T: Scalar = f64> {
    pub trial_id: TrialId,
    pub score: T,
    pub gate: GateOutcome<T>,
    pub label: Option<TrialLabel>,
}

pub type PhraseTable = BTreeMap<PhraseId, Phrase>;
pub type Enrollments<T = f64> = BTreeMap<ModelId, EnrollmentModel<T>>;
pub type TranscriptTable = BTreeMap<UtteranceId, Transcript>;

/// Scores one trial: punitive score if the phrase gate fails, otherwise the
/// cosine between the fused enrollment centroids and the fused test vectors.
pub fn score_trial<T: Scalar>(
    trial: &Trial,
    enrollment: &EnrollmentModel<T>,
    test_per_space: &BTreeMap<SpaceName, Embedding<T>>,
    hyp: Option<&Transcript>,
    phrases: &PhraseTable,
    cfg: &GateConfig<T>,
    order: &SpaceOrder,
) -> Result<ScoreRecord<T>, ScoreError> {
    let reference = phrases
        .get(enrollment.phrase_id())
        .ok_or_else(|| ScoreError::MissingPhrase(enrollment.phrase_id().clone()))?;
    let hyp = hyp.ok_or_else(|| ScoreError::MissingTranscript(trial.test_id.clone()))?;
    let test_blocks = order
        .spaces()
        .iter()
        .map(|s| {
            test_per_space
                .get(s)
                .cloned()
                .ok_or_else(|| ScoreError::MissingSpace {
                    space: s.clone(),
                    utt: trial.test_id.clone(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let enrolled = enrollment.fused(order)?;

    let outcome = gate(hyp, reference, cfg)?;
    let score = match outcome {
        GateOutcome::Fail(_) => cfg.punitive_score(),
        GateOutcome::Pass(_) => enrolled.cosine(&fuse(&test_blocks)?)?,
    };
    Ok(ScoreRecord {
        trial_id: trial.trial_id.clone(),
        score,
        gate: outcome,
        label: trial.label,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrityMode {
    /// Abort on the first bad reference.
    #[default]
    Strict,
    /// Skip bad trials and report them.
    Lenient,
}

/// Everything needed to score a trial list.
#[derive(Debug, Clone)]
pub struct ScoringInputs<T: Scalar = f64> {
    pub order: SpaceOrder,
    pub enrollments: Enrollments<T>,
    pub embeddings: EmbeddingStore<T>,
    pub transcripts: TranscriptTable,
    pub phrases: PhraseTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skipped {
    pub id: String,
    pub error: ScoreError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBatch<T: Scalar = f64> {
    pub records: Vec<ScoreRecord<T>>,
    pub skipped: Vec<Skipped>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{id}: {error}")]
pub struct BatchError {
    pub id: String,
    pub error: ScoreError,
}

/// Builds enrollment models for every entry. In lenient mode entries with
/// missing repetitions are skipped and reported.
pub fn build_enrollments<T: Scalar>(
    entries: &[EnrollEntry],
    store: &EmbeddingStore<T>,
    order: &SpaceOrder,
    mode: IntegrityMode,
) -> Result<(Enrollments<T>, Vec<Skipped>), BatchError> {
    let mut models = BTreeMap::new();
    let mut skipped = Vec::new();
    for entry in entries {
        match EnrollmentModel::build(entry, store, order) {
            Ok(m) => {
                models.insert(entry.model_id.clone(), m);
            }
            Err(error) => {
                let id = entry.model_id.to_string();
                match mode {
                    IntegrityMode::Strict => return Err(BatchError { id, error }),
                    IntegrityMode::Lenient => skipped.push(Skipped { id, error }),
                }
            }
        }
    }
    Ok((models, skipped))
}

/// Scores every trial in input order.
pub fn score_all<T: Scalar>(
    trials: &[Trial],
    inputs: &ScoringInputs<T>,
    cfg: &GateConfig<T>,
    mode: IntegrityMode,
) -> Result<ScoreBatch<T>, BatchError> {
    let mut seen = BTreeSet::new();
    let mut records = Vec::with_capacity(trials.len());
    let mut skipped = Vec::new();
    for trial in trials {
        let result = if seen.insert(&trial.trial_id) {
            score_one(trial, inputs, cfg)
        } else {
            Err(ScoreError::DuplicateTrial(trial.trial_id.clone()))
        };
        match result {
            Ok(r) => records.push(r),
            Err(error) => {
                let id = trial.trial_id.to_string();
                match mode {
                    IntegrityMode::Strict => return Err(BatchError { id, error }),
                    IntegrityMode::Lenient => skipped.push(Skipped { id, error }),
                }
            }
        }
    }
    Ok(ScoreBatch { records, skipped })
}

fn score_one<T: Scalar>(
    trial: &Trial,
    inputs: &ScoringInputs<T>,
    cfg: &GateConfig<T>,
) -> Result<ScoreRecord<T>, ScoreError> {
    let enrollment = inputs
        .enrollments
        .get(&trial.model_id)
        .ok_or_else(|| ScoreError::MissingModel(trial.model_id.clone()))?;
    let test = inputs.embeddings.per_space(&inputs.order, &trial.test_id)?;
    score_trial(
        trial,
        enrollment,
        &test,
        inputs.transcripts.get(&trial.test_id),
        &inputs.phrases,
        cfg,
        &inputs.order,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn emb(v: &[f64]) -> Embedding {
        Embedding::new(v.to_vec()).unwrap()
    }

    fn space(s: &str) -> SpaceName {
        SpaceName::new(s).unwrap()
    }

    fn utt(s: &str) -> UtteranceId {
        UtteranceId::new(s).unwrap()
    }

    #[test]
    fn enroll_identical_reps() {
        let c = enroll(&[emb(&[3.0, 4.0]), emb(&[3.0, 4.0]), emb(&[3.0, 4.0])]).unwrap();
        assert!((c.values()[0] - 0.6).abs() < 1e-15);
        assert!((c.values()[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn enroll_mixed_reps() {
        let c = enroll(&[emb(&[1.0, 0.0]), emb(&[0.0, 1.0]), emb(&[1.0, 0.0])]).unwrap();
        // normalize([2/3, 1/3]) = [2, 1] / sqrt(5)
        assert!((c.values()[0] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((c.values()[1] - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((c.values()[0] - 0.894427).abs() < 1e-6);
        assert!((c.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn enroll_cancellation_is_degenerate() {
        let h = 3f64.sqrt() / 2.0;
        let err = enroll(&[emb(&[1.0, 0.0]), emb(&[-0.5, h]), emb(&[-0.5, -h])]).unwrap_err();
        assert_eq!(err.class(), "DegenerateVector");
    }

    #[test]
    fn enroll_errors() {
        assert_eq!(enroll(&[emb(&[1.0])]).unwrap_err(), FuseError::RepCount(1));
        assert_eq!(
            enroll(&[emb(&[1.0, 0.0]), emb(&[1.0]), emb(&[1.0, 0.0])])
                .unwrap_err()
                .class(),
            "DimensionMismatch"
        );
    }

    #[test]
    fn enroll_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let reps: Vec<Embedding> = (0..3)
                .map(|_| emb(&(0..16).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()))
                .collect();
            let base = enroll(&reps).unwrap();
            for p in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let perm: Vec<Embedding> = p.iter().map(|&i| reps[i].clone()).collect();
                let other = enroll(&perm).unwrap();
                for (a, b) in base.values().iter().zip(other.values()) {
                    assert!((a - b).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn fuse_examples() {
        let f = fuse(&[emb(&[3.0, 4.0])]).unwrap();
        assert!((f.values()[0] - 0.6).abs() < 1e-15 && (f.values()[1] - 0.8).abs() < 1e-15);
        let f = fuse(&[emb(&[1.0, 0.0]), emb(&[0.0, 2.0])]).unwrap();
        assert_eq!(f.values(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(f.dims(), &[2, 2]);
        assert_eq!(f.block(1), &[0.0, 1.0]);
        assert_eq!(fuse::<f64>(&[]).unwrap_err(), FuseError::NoSpaces);
        assert_eq!(fuse(&[emb(&[0.0, 0.0])]).unwrap_err().class(), "DegenerateVector");
    }

    #[test]
    fn fused_cosine_is_mean_of_space_cosines() {
        let x = fuse(&[emb(&[1.0, 0.0]), emb(&[0.0, 1.0])]).unwrap();
        let y = fuse(&[emb(&[1.0, 0.0]), emb(&[1.0, 0.0])]).unwrap();
        assert!((x.cosine(&y).unwrap() - 0.5).abs() < 1e-12);
        let z = fuse(&[emb(&[1.0, 0.0, 0.0])]).unwrap();
        assert_eq!(x.cosine(&z).unwrap_err().class(), "DimensionMismatch");
    }

    #[test]
    fn space_order_validation() {
        assert_eq!(SpaceOrder::new(vec![]).unwrap_err(), SpaceOrderError::Empty);
        assert!(SpaceOrder::new(vec![space("a"), space("a")]).is_err());
    }

    #[test]
    fn enrollment_model_checks_unit_norm() {
        let mut c = BTreeMap::new();
        c.insert(space("a"), emb(&[2.0, 0.0]));
        let reps = [utt("r1"), utt("r2"), utt("r3")];
        let err = EnrollmentModel::new(
            ModelId::new("m").unwrap(),
            PhraseId::new("p").unwrap(),
            reps,
            c,
        )
        .unwrap_err();
        assert_eq!(err, FuseError::NotUnitNorm(space("a")));
    }

    /// Two spaces; model m1 enrolled on phrase p1 from identical reps.
    struct Fixture {
        inputs: ScoringInputs,
    }

    fn fixture() -> Fixture {
        let order = SpaceOrder::new(vec![space("a"), space("b")]).unwrap();
        let mut store = EmbeddingStore::new();
        // space a: enrollment along x, test t1 at cos 0.8, t2 along x
        // space b: enrollment along x, test t1 at cos 0.6, t2 along x
        let mut a = BTreeMap::new();
        let mut b = BTreeMap::new();
        for r in ["r1", "r2", "r3"] {
            a.insert(utt(r), emb(&[1.0, 0.0]));
            b.insert(utt(r), emb(&[1.0, 0.0, 0.0]));
        }
        a.insert(utt("t1"), emb(&[0.8, 0.6]));
        b.insert(utt("t1"), emb(&[0.6, 0.8, 0.0]));
        a.insert(utt("t2"), emb(&[5.0, 0.0]));
        b.insert(utt("t2"), emb(&[2.0, 0.0, 0.0]));
        store.insert_space(space("a"), a);
        store.insert_space(space("b"), b);
        let entry = EnrollEntry {
            model_id: ModelId::new("m1").unwrap(),
            phrase_id: PhraseId::new("p1").unwrap(),
            rep_ids: [utt("r1"), utt("r2"), utt("r3")],
        };
        let (enrollments, skipped) =
            build_enrollments(&[entry], &store, &order, IntegrityMode::Strict).unwrap();
        assert!(skipped.is_empty());
        let mut phrases = PhraseTable::new();
        let pid = PhraseId::new("p1").unwrap();
        phrases.insert(pid.clone(), Phrase::new(pid, "open sesame").unwrap());
        let mut transcripts = TranscriptTable::new();
        for (u, text) in [("t1", "open sesame"), ("t2", "close the gate now")] {
            transcripts.insert(
                utt(u),
                Transcript {
                    utt_id: utt(u),
                    text: text.into(),
                },
            );
        }
        Fixture {
            inputs: ScoringInputs {
                order,
                enrollments,
                embeddings: store,
                transcripts,
                phrases,
            },
        }
    }

    fn trial(id: &str, model: &str, test: &str) -> Trial {
        Trial {
            trial_id: TrialId::new(id).unwrap(),
            model_id: ModelId::new(model).unwrap(),
            test_id: utt(test),
            label: Some(TrialLabel::Tc),
        }
    }

    #[test]
    fn score_all_mixes_cosine_and_punitive() {
        let f = fixture();
        let cfg = GateConfig::default();
        let batch = score_all(
            &[trial("x1", "m1", "t1"), trial("x2", "m1", "t2")],
            &f.inputs,
            &cfg,
            IntegrityMode::Strict,
        )
        .unwrap();
        assert_eq!(batch.records.len(), 2);
        // mean of 0.8 and 0.6
        assert!((batch.records[0].score - 0.7).abs() < 1e-12);
        assert!(batch.records[0].gate.passed());
        assert_eq!(batch.records[1].score, -1.0);
        assert!(!batch.records[1].gate.passed());
        assert_eq!(batch.records[1].label, Some(TrialLabel::Tc));

        let open = score_all(
            &[trial("x2", "m1", "t2")],
            &f.inputs,
            &cfg.disabled(),
            IntegrityMode::Strict,
        )
        .unwrap();
        assert!((open.records[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn score_all_empty() {
        let f = fixture();
        let batch = score_all(&[], &f.inputs, &GateConfig::default(), IntegrityMode::Strict).unwrap();
        assert!(batch.records.is_empty() && batch.skipped.is_empty());
    }

    #[test]
    fn strict_and_lenient_integrity() {
        let f = fixture();
        let cfg = GateConfig::default();
        let trials = [
            trial("x1", "m1", "t1"),
            trial("x1", "m1", "t2"),
            trial("x3", "nope", "t1"),
            trial("x4", "m1", "ghost"),
        ];
        let err = score_all(&trials, &f.inputs, &cfg, IntegrityMode::Strict).unwrap_err();
        assert_eq!(err.id, "x1");
        assert_eq!(err.error.class(), "DuplicateTrial");

        let batch = score_all(&trials, &f.inputs, &cfg, IntegrityMode::Lenient).unwrap();
        assert_eq!(batch.records.len(), 1);
        let classes: Vec<_> = batch.skipped.iter().map(|s| s.error.class()).collect();
        assert_eq!(classes, ["DuplicateTrial", "MissingModel", "MissingSpace"]);
    }

    #[test]
    fn missing_transcript_and_phrase() {
        let mut f = fixture();
        f.inputs.transcripts.remove(&utt("t1"));
        let err = score_all(&[trial("x", "m1", "t1")], &f.inputs, &GateConfig::default(), IntegrityMode::Strict)
            .unwrap_err();
        assert_eq!(err.error, ScoreError::MissingTranscript(utt("t1")));
        f.inputs.phrases.clear();
        let err = score_all(&[trial("x", "m1", "t2")], &f.inputs, &GateConfig::default(), IntegrityMode::Strict)
            .unwrap_err();
        assert_eq!(err.error.class(), "MissingPhrase");
    }

    #[test]
    fn punitive_scores_ignore_embeddings() {
        let mut f = fixture();
        let cfg = GateConfig::new(0.3, -2.5).unwrap();
        let before = score_all(&[trial("x", "m1", "t2")], &f.inputs, &cfg, IntegrityMode::Strict).unwrap();
        let mut perturbed = BTreeMap::new();
        perturbed.insert(utt("t2"), emb(&[-0.3, 0.9]));
        let mut a = f.inputs.embeddings.space(&space("a")).unwrap().clone();
        a.extend(perturbed);
        f.inputs.embeddings.insert_space(space("a"), a);
        let after = score_all(&[trial("x", "m1", "t2")], &f.inputs, &cfg, IntegrityMode::Strict).unwrap();
        assert_eq!(before.records[0].score, -2.5);
        assert_eq!(before.records[0].score.to_bits(), after.records[0].score.to_bits());
    }

    #[test]
    fn lenient_enrollment_skips_missing_reps() {
        let f = fixture();
        let bad = EnrollEntry {
            model_id: ModelId::new("m2").unwrap(),
            phrase_id: PhraseId::new("p1").unwrap(),
            rep_ids: [utt("r1"), utt("r2"), utt("missing")],
        };
        let err = build_enrollments(std::slice::from_ref(&bad), &f.inputs.embeddings, &f.inputs.order, IntegrityMode::Strict)
            .unwrap_err();
        assert_eq!(err.id, "m2");
        let (models, skipped) =
            build_enrollments(&[bad], &f.inputs.embeddings, &f.inputs.order, IntegrityMode::Lenient).unwrap();
        assert!(models.is_empty());
        assert_eq!(skipped.len(), 1);
    }

    #[test]
    fn concatenation_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut draw = |d: usize| emb(&(0..d).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        for _ in 0..300 {
            let (a1, a2, b1, b2) = (draw(48), draw(48), draw(100), draw(100));
            let fused = fuse(&[a1.clone(), b1.clone()])
                .unwrap()
                .cosine(&fuse(&[a2.clone(), b2.clone()]).unwrap())
                .unwrap();
            let mean = (vector::cosine(&a1, &a2).unwrap() + vector::cosine(&b1, &b2).unwrap()) / 2.0;
            assert!((fused - mean).abs() < 1e-9);
        }
    }
}
