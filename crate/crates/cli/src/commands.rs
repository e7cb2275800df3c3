use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use tdsv::enrollfuse::{build_enrollments, score_all, BatchError, EmbeddingStore, ScoringInputs, Skipped};
use tdsv::io::{self, IoError};
use tdsv::metrics::{self, LabeledScores, MetricsError};
use tdsv::simkit::{self, SimConfig, SimError, SpaceSpec};
use tdsv::textgate::TextGateError;
use tdsv::{DcfParams, GateConfig, IntegrityMode, ScoreRecord, SpaceName, SpaceOrder, SubsetMode};

use crate::report::Report;
use crate::{DetArgs, EvaluateArgs, LabeledScoresArgs, ScoreArgs, SimulateArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Batch(#[from] BatchError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Gate(#[from] TextGateError),
    /// Flag value that parsed but is not acceptable.
    #[error("{0}")]
    BadArgument(String),
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Io(e) => e.class(),
            CliError::Batch(e) => e.error.class(),
            CliError::Metrics(e) => e.class(),
            CliError::Sim(e) => e.class(),
            CliError::Gate(e) => e.class(),
            CliError::BadArgument(_) => "BadArgument",
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn parse_space_paths(specs: &[String]) -> Result<Vec<(SpaceName, &Path)>> {
    specs
        .iter()
        .map(|s| {
            let (name, path) = s
                .split_once('=')
                .ok_or_else(|| CliError::BadArgument(format!("--embeddings expects SPACE=PATH, got {s:?}")))?;
            let name = SpaceName::new(name).map_err(|e| CliError::BadArgument(format!("--embeddings {s:?}: {e}")))?;
            Ok((name, Path::new(path)))
        })
        .collect()
}

fn report_skipped(skipped: &[Skipped]) {
    for s in skipped {
        eprintln!("warning[{}]: {}: {}", s.error.class(), s.id, s.error);
    }
}

pub fn score(a: ScoreArgs) -> Result<()> {
    let mode = if a.integrity.lenient {
        IntegrityMode::Lenient
    } else {
        IntegrityMode::Strict
    };
    let mut cfg = GateConfig::new(a.cer_threshold, a.punitive_score)?;
    if a.no_gate {
        cfg = cfg.disabled();
    }
    let spaces = parse_space_paths(&a.embeddings)?;
    let order = SpaceOrder::new(spaces.iter().map(|(s, _)| s.clone()).collect())
        .map_err(|e| CliError::BadArgument(format!("--embeddings: {e}")))?;

    let mut store = EmbeddingStore::new();
    for (space, path) in &spaces {
        store.insert_space(space.clone(), io::parse_embeddings(path)?.table);
    }
    let trials = io::parse_trials(&a.trials)?;
    let entries = io::parse_enrollmap(&a.enrollmap)?;
    let phrases = io::parse_phrases(&a.phrases)?;
    let transcripts = io::parse_transcripts(&a.transcripts)?;

    let (enrollments, skipped_models) = build_enrollments(&entries, &store, &order, mode)?;
    report_skipped(&skipped_models);
    let inputs = ScoringInputs {
        order,
        enrollments,
        embeddings: store,
        transcripts,
        phrases,
    };
    let batch = score_all(&trials, &inputs, &cfg, mode)?;
    report_skipped(&batch.skipped);
    io::write_scores(&batch.records, &a.out)?;

    let punitive = batch.records.iter().filter(|r| !r.gate.passed()).count();
    println!("scored={}", batch.records.len());
    println!("punitive={punitive}");
    println!("skipped_trials={}", batch.skipped.len());
    println!("skipped_models={}", skipped_models.len());
    Ok(())
}

/// Score records with labels joined from the trial list when one is given.
fn labeled_records(input: &LabeledScoresArgs) -> Result<Vec<ScoreRecord>> {
    let mut records = io::parse_scores(&input.scores)?;
    if let Some(path) = &input.trials {
        let labels: BTreeMap<_, _> = io::parse_trials(path)?
            .into_iter()
            .map(|t| (t.trial_id, t.label))
            .collect();
        for r in &mut records {
            if let Some(&label) = labels.get(&r.trial_id) {
                r.label = label.or(r.label);
            }
        }
    }
    Ok(records)
}

fn subset_scores(records: &[ScoreRecord], mode: &SubsetMode) -> Result<(Vec<ScoreRecord>, LabeledScores)> {
    let subset = metrics::select_subset(records, mode)?;
    let scores = LabeledScores::from_records(&subset)?;
    Ok((subset, scores))
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let params = DcfParams::new(a.c_miss, a.c_fa, a.p_target)?;
    let records = labeled_records(&a.input)?;
    let (subset, scores) = subset_scores(&records, &a.input.subset)?;
    let report = Report::new(&a.input.subset, &subset, &scores, &params);
    let text = report.to_kv();
    print!("{text}");
    if let Some(path) = &a.out {
        write_file(path, &text)?;
    }
    if let Some(path) = &a.json {
        write_file(path, &report.to_json())?;
    }
    Ok(())
}

pub fn det(a: DetArgs) -> Result<()> {
    let records = labeled_records(&a.input)?;
    let (_, scores) = subset_scores(&records, &a.input.subset)?;
    let points = metrics::det_points(&scores);
    io::write_det(&points, &a.out)?;
    println!("points={}", points.len());
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| {
        CliError::Io(IoError::Write {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn parse_space_spec(s: &str) -> Result<SpaceSpec> {
    let bad = || CliError::BadArgument(format!("--space expects NAME:DIM:SIGMA, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [name, dim, sigma] = parts[..] else {
        return Err(bad());
    };
    Ok(SpaceSpec {
        name: SpaceName::new(name).map_err(|_| bad())?,
        dim: dim.parse().map_err(|_| bad())?,
        sigma: sigma.parse().map_err(|_| bad())?,
    })
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let defaults = SimConfig::default();
    let spaces = if a.spaces.is_empty() {
        defaults.spaces.clone()
    } else {
        a.spaces.iter().map(|s| parse_space_spec(s)).collect::<Result<_>>()?
    };
    let cfg = SimConfig {
        n_speakers: a.n_speakers,
        n_phrases: a.n_phrases,
        spaces,
        transcript_error_rate_correct: a.error_rate_correct,
        transcript_error_rate_wrong: a.error_rate_wrong,
        master_seed: a.seed,
        ..defaults
    }
    .with_trials_per_type(a.trials_per_type);
    let ds = simkit::gen_dataset(&cfg)?;
    let paths = io::write_dataset(&ds, &a.out)?;
    println!("trials={}", paths.trials.display());
    println!("enrollmap={}", paths.enrollmap.display());
    println!("phrases={}", paths.phrases.display());
    println!("transcripts={}", paths.transcripts.display());
    for (space, path) in &paths.embeddings {
        println!("embeddings={space}={}", path.display());
    }
    Ok(())
}
