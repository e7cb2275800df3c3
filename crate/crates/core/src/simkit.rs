//! Seeded synthetic TDSV datasets with known ground truth.
//!
//! Speakers are random unit directions per model space; an utterance is the
//! speaker direction plus isotropic Gaussian noise, renormalized. ASR output
//! is simulated by per-character random edits of the phrase actually spoken.
//!
//! Every random entity draws from its own ChaCha8 stream seeded by
//! [`sub_seed`]`(master, kind, index)`, so any single entity can be
//! regenerated without replaying the rest of the dataset.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::enrollfuse::{
    build_enrollments, BatchError, EmbeddingStore, EnrollEntry, IntegrityMode, PhraseTable,
    ScoringInputs, SpaceOrder, TranscriptTable, REPETITIONS,
};
use crate::textgate::{normalize_text, Phrase, Transcript};
use crate::types::{ModelId, PhraseId, SpaceName, Trial, TrialId, TrialLabel, UtteranceId};
use crate::vector::{l2_normalize, Embedding, VectorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config field `{field}`: {reason}")]
    ConfigInvalid { field: &'static str, reason: String },
    #[error(transparent)]
    Vector(#[from] VectorError),
}

impl SimError {
    pub fn class(&self) -> &'static str {
        match self {
            SimError::ConfigInvalid { .. } => "ConfigInvalid",
            SimError::Vector(e) => e.class(),
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable seed for entity `index` of kind `kind` under `master`.
///
/// FNV-1a over the kind bytes, mixed with the master seed and the index
/// through SplitMix64 finalizers. Stable across platforms and releases.
pub fn sub_seed(master: u64, kind: &str, index: u64) -> u64 {
    let kind_hash = kind
        .bytes()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME));
    splitmix64(splitmix64(master ^ kind_hash) ^ splitmix64(index))
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// `n` unit-norm speaker directions of dimension `dim`.
pub fn gen_speakers(n: usize, dim: usize, seed: u64) -> Vec<Embedding> {
    (0..n as u64)
        .map(|i| {
            let mut rng = rng_for(sub_seed(seed, "speaker", i));
            // a standard Gaussian draw of dim >= 2 is nonzero with probability 1
            loop {
                let v = Embedding::new(gaussian(&mut rng, dim)).expect("finite draw");
                if let Ok(u) = l2_normalize(&v) {
                    break u;
                }
            }
        })
        .collect()
}

/// One utterance embedding: `normalize(mean + sigma * g)`, `g` standard normal.
pub fn gen_utterance(mean: &Embedding, sigma: f64, seed: u64) -> Result<Embedding, VectorError> {
    if sigma == 0.0 {
        return Ok(mean.clone());
    }
    let mut rng = rng_for(seed);
    let noisy = mean
        .values()
        .iter()
        .map(|&m| m + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    l2_normalize(&Embedding::new(noisy)?)
}

/// Characters used for substitutions and insertions: everything in the
/// phrase table plus ASCII letters, sorted. Whitespace is left out since an
/// edit that only adds or changes edge whitespace vanishes under trimming.
pub fn corruption_alphabet<'a>(phrases: impl IntoIterator<Item = &'a str>) -> Vec<char> {
    let mut set: BTreeSet<char> = ('a'..='z').chain('A'..='Z').collect();
    for p in phrases {
        set.extend(p.chars().filter(|c| !c.is_whitespace()));
    }
    set.into_iter().collect()
}

fn pick_other(rng: &mut ChaCha8Rng, alphabet: &[char], avoid: char) -> Option<char> {
    let n = alphabet.iter().filter(|&&c| c != avoid).count();
    if n == 0 {
        return None;
    }
    alphabet.iter().copied().filter(|&c| c != avoid).nth(rng.gen_range(0..n))
}

/// Simulated ASR errors: each code point, with probability `rate`, is
/// substituted, deleted or followed by an inserted character (uniformly).
///
/// If the edits happen to reproduce the reference exactly, one position is
/// substituted so that an edited transcript always differs from its source.
pub fn corrupt_transcript(reference: &str, rate: f64, alphabet: &[char], seed: u64) -> String {
    let mut rng = rng_for(seed);
    let mut out = Vec::new();
    let mut edited = false;
    let source: Vec<char> = reference.chars().collect();
    for &c in &source {
        if !rng.gen_bool(rate) {
            out.push(c);
            continue;
        }
        edited = true;
        match rng.gen_range(0..3) {
            0 => {
                if let Some(s) = pick_other(&mut rng, alphabet, c) {
                    out.push(s);
                }
            }
            1 => {}
            _ => {
                out.push(c);
                if !alphabet.is_empty() {
                    out.push(alphabet[rng.gen_range(0..alphabet.len())]);
                }
            }
        }
    }
    let unchanged = |out: &[char]| normalize_text(&out.iter().collect::<String>()) == normalize_text(reference);
    if edited && !out.is_empty() && unchanged(&out) {
        let pos = rng.gen_range(0..out.len());
        match pick_other(&mut rng, alphabet, out[pos]) {
            Some(s) => out[pos] = s,
            None => {
                out.remove(pos);
            }
        }
    }
    out.into_iter().collect()
}

/// Phrase texts used before falling back to generated pseudo-sentences.
const PHRASE_BANK: [&str; 10] = [
    "صدای من رمز عبور من است",
    "امروز هوا آفتابی است",
    "لطفا در را باز کنید",
    "سلام به همه دوستان",
    "من در این شهر زندگی می کنم",
    "my voice is my password",
    "open the front door please",
    "the weather is sunny today",
    "hello to all of my friends",
    "verify my identity with my voice",
];

fn gen_phrase_text(master: u64, index: usize) -> String {
    if let Some(p) = PHRASE_BANK.get(index) {
        return (*p).to_string();
    }
    let mut rng = rng_for(sub_seed(master, "phrase", index as u64));
    let words = rng.gen_range(3..=5);
    (0..words)
        .map(|_| {
            let len = rng.gen_range(3..=7);
            (0..len)
                .map(|_| char::from(b'a' + rng.gen_range(0..26u8)))
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSpec {
    pub name: SpaceName,
    pub dim: usize,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_speakers: usize,
    pub n_phrases: usize,
    pub spaces: Vec<SpaceSpec>,
    pub reps_per_enrollment: usize,
    pub trials_per_type: BTreeMap<TrialLabel, usize>,
    pub transcript_error_rate_correct: f64,
    pub transcript_error_rate_wrong: f64,
    pub master_seed: u64,
}

impl Default for SimConfig {
    /// 50 speakers, 10 phrases, two 64-dimensional spaces at sigma 0.05,
    /// 100 trials per label, 5% transcript error rate.
    fn default() -> Self {
        let space = |n: &str| SpaceSpec {
            name: SpaceName::new(n).expect("valid name"),
            dim: 64,
            sigma: 0.05,
        };
        Self {
            n_speakers: 50,
            n_phrases: 10,
            spaces: vec![space("spk_a"), space("spk_b")],
            reps_per_enrollment: REPETITIONS,
            trials_per_type: TrialLabel::ALL.iter().map(|&l| (l, 100)).collect(),
            transcript_error_rate_correct: 0.05,
            transcript_error_rate_wrong: 0.05,
            master_seed: 0,
        }
    }
}

impl SimConfig {
    pub fn with_trials_per_type(mut self, n: usize) -> Self {
        self.trials_per_type = TrialLabel::ALL.iter().map(|&l| (l, n)).collect();
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |field, reason: &str| {
            Err(SimError::ConfigInvalid {
                field,
                reason: reason.to_string(),
            })
        };
        if self.n_speakers < 2 {
            return bad("n_speakers", "need at least 2 speakers for impostor trials");
        }
        if self.n_phrases < 2 {
            return bad("n_phrases", "need at least 2 phrases for wrong-phrase trials");
        }
        if self.reps_per_enrollment != REPETITIONS {
            return bad("reps_per_enrollment", "enrollment uses exactly 3 repetitions");
        }
        if self.spaces.is_empty() {
            return bad("spaces", "declare at least one model space");
        }
        let mut names = BTreeSet::new();
        for s in &self.spaces {
            if !names.insert(&s.name) {
                return bad("spaces", "space names must be unique");
            }
            if s.dim < 2 {
                return bad("spaces.dim", "dimension must be at least 2");
            }
            if !(s.sigma.is_finite() && s.sigma >= 0.0) {
                return bad("spaces.sigma", "sigma must be finite and >= 0");
            }
        }
        for (field, r) in [
            ("transcript_error_rate_correct", self.transcript_error_rate_correct),
            ("transcript_error_rate_wrong", self.transcript_error_rate_wrong),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return bad(field, "rate must lie in [0, 1]");
            }
        }
        if self.trials_per_type.values().all(|&n| n == 0) {
            return bad("trials_per_type", "at least one trial is required");
        }
        Ok(())
    }
}

/// Who spoke what, for one utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truth {
    pub speaker: usize,
    pub phrase: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub order: SpaceOrder,
    pub phrases: Vec<Phrase>,
    pub enrollments: Vec<EnrollEntry>,
    pub embeddings: EmbeddingStore,
    pub transcripts: Vec<Transcript>,
    pub trials: Vec<Trial>,
    pub model_truth: BTreeMap<ModelId, Truth>,
    pub utterance_truth: BTreeMap<UtteranceId, Truth>,
}

fn model_id(speaker: usize) -> ModelId {
    ModelId::new(format!("m{speaker:04}")).expect("valid id")
}

fn rep_id(speaker: usize, k: usize) -> UtteranceId {
    UtteranceId::new(format!("m{speaker:04}_r{k}")).expect("valid id")
}

fn phrase_id(index: usize) -> PhraseId {
    PhraseId::new(format!("p{index:02}")).expect("valid id")
}

/// Uniform index in `0..n` other than `avoid`.
fn other_index(rng: &mut ChaCha8Rng, n: usize, avoid: usize) -> usize {
    let k = rng.gen_range(0..n - 1);
    if k >= avoid {
        k + 1
    } else {
        k
    }
}

pub fn gen_dataset(cfg: &SimConfig) -> Result<SyntheticDataset, SimError> {
    cfg.validate()?;
    let master = cfg.master_seed;
    let order = SpaceOrder::new(cfg.spaces.iter().map(|s| s.name.clone()).collect())
        .expect("validated space names");

    let mut texts: Vec<String> = Vec::with_capacity(cfg.n_phrases);
    for i in 0..cfg.n_phrases {
        let mut text = gen_phrase_text(master, i);
        let mut salt = 0u64;
        while texts.contains(&text) {
            salt += 1;
            text = gen_phrase_text(sub_seed(master, "phrase-retry", salt), i.max(PHRASE_BANK.len()));
        }
        texts.push(text);
    }
    let phrases: Vec<Phrase> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| Phrase::new(phrase_id(i), t.clone()).expect("non-empty phrase"))
        .collect();
    let alphabet = corruption_alphabet(texts.iter().map(String::as_str));

    let means: Vec<Vec<Embedding>> = cfg
        .spaces
        .iter()
        .map(|s| gen_speakers(cfg.n_speakers, s.dim, sub_seed(master, &format!("speakers:{}", s.name), 0)))
        .collect();
    let mut tables: Vec<BTreeMap<UtteranceId, Embedding>> = vec![BTreeMap::new(); cfg.spaces.len()];
    let mut model_truth = BTreeMap::new();
    let mut utterance_truth = BTreeMap::new();

    let mut enrollments = Vec::with_capacity(cfg.n_speakers);
    #[allow(clippy::needless_range_loop)] // spk indexes every space's mean table
    for spk in 0..cfg.n_speakers {
        let phrase = rng_for(sub_seed(master, "enroll-phrase", spk as u64)).gen_range(0..cfg.n_phrases);
        let rep_ids: [UtteranceId; REPETITIONS] = std::array::from_fn(|k| rep_id(spk, k));
        for (k, id) in rep_ids.iter().enumerate() {
            for (si, s) in cfg.spaces.iter().enumerate() {
                let seed = sub_seed(master, &format!("rep:{}", s.name), (spk * REPETITIONS + k) as u64);
                tables[si].insert(id.clone(), gen_utterance(&means[si][spk], s.sigma, seed)?);
            }
            utterance_truth.insert(id.clone(), Truth { speaker: spk, phrase });
        }
        model_truth.insert(model_id(spk), Truth { speaker: spk, phrase });
        enrollments.push(EnrollEntry {
            model_id: model_id(spk),
            phrase_id: phrase_id(phrase),
            rep_ids,
        });
    }

    let mut trials = Vec::new();
    let mut transcripts = Vec::new();
    let mut t = 0usize;
    for (&label, &count) in &cfg.trials_per_type {
        for _ in 0..count {
            let mut rng = rng_for(sub_seed(master, "trial", t as u64));
            let target_spk = rng.gen_range(0..cfg.n_speakers);
            let enrolled = model_truth[&model_id(target_spk)].phrase;
            let spk = if label.same_speaker() {
                target_spk
            } else {
                other_index(&mut rng, cfg.n_speakers, target_spk)
            };
            let phrase = if label.same_phrase() {
                enrolled
            } else {
                other_index(&mut rng, cfg.n_phrases, enrolled)
            };
            let test_id = UtteranceId::new(format!("u{t:06}")).expect("valid id");
            for (si, s) in cfg.spaces.iter().enumerate() {
                let seed = sub_seed(master, &format!("test:{}", s.name), t as u64);
                tables[si].insert(test_id.clone(), gen_utterance(&means[si][spk], s.sigma, seed)?);
            }
            let rate = if label.same_phrase() {
                cfg.transcript_error_rate_correct
            } else {
                cfg.transcript_error_rate_wrong
            };
            transcripts.push(Transcript {
                utt_id: test_id.clone(),
                text: corrupt_transcript(&texts[phrase], rate, &alphabet, sub_seed(master, "transcript", t as u64)),
            });
            utterance_truth.insert(test_id.clone(), Truth { speaker: spk, phrase });
            trials.push(Trial {
                trial_id: TrialId::new(format!("t{t:06}")).expect("valid id"),
                model_id: model_id(target_spk),
                test_id,
                label: Some(label),
            });
            t += 1;
        }
    }

    let mut embeddings = EmbeddingStore::new();
    for (s, table) in cfg.spaces.iter().zip(tables) {
        embeddings.insert_space(s.name.clone(), table);
    }
    Ok(SyntheticDataset {
        order,
        phrases,
        enrollments,
        embeddings,
        transcripts,
        trials,
        model_truth,
        utterance_truth,
    })
}

impl SyntheticDataset {
    pub fn phrase_table(&self) -> PhraseTable {
        self.phrases.iter().map(|p| (p.id().clone(), p.clone())).collect()
    }

    pub fn transcript_table(&self) -> TranscriptTable {
        self.transcripts.iter().map(|t| (t.utt_id.clone(), t.clone())).collect()
    }

    /// Enrolls every model and bundles the tables for scoring.
    pub fn scoring_inputs(&self) -> Result<ScoringInputs, BatchError> {
        let (enrollments, _) =
            build_enrollments(&self.enrollments, &self.embeddings, &self.order, IntegrityMode::Strict)?;
        Ok(ScoringInputs {
            order: self.order.clone(),
            enrollments,
            embeddings: self.embeddings.clone(),
            transcripts: self.transcript_table(),
            phrases: self.phrase_table(),
        })
    }
}

/// Re-derives every trial label from the ground-truth speaker and phrase ids
/// and reports the first trial whose stored label disagrees.
pub fn check_labels(ds: &SyntheticDataset) -> Result<(), String> {
    for trial in &ds.trials {
        let model = ds
            .model_truth
            .get(&trial.model_id)
            .ok_or_else(|| format!("{}: unknown model {}", trial.trial_id, trial.model_id))?;
        let test = ds
            .utterance_truth
            .get(&trial.test_id)
            .ok_or_else(|| format!("{}: unknown utterance {}", trial.trial_id, trial.test_id))?;
        let expected = TrialLabel::from_parts(model.speaker == test.speaker, model.phrase == test.phrase);
        if trial.label != Some(expected) {
            return Err(format!(
                "{}: stored label {:?}, ground truth {expected}",
                trial.trial_id, trial.label
            ));
        }
    }
    Ok(())
}
