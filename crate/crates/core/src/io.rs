//! Text file formats.
//!
//! All files are UTF-8 with `\n` line endings (a trailing `\r` is tolerated
//! on input). Blank lines are skipped. Every parse error names the file and
//! the 1-based line.
//!
//! | file        | line format                                   |
//! |-------------|-----------------------------------------------|
//! | embeddings  | `#dim D` header, then `id\tv1 v2 ... vD`       |
//! | trials      | `trial_id\tmodel_id\ttest_id[\tlabel]`         |
//! | transcripts | `utt_id\ttext` (text may be empty)             |
//! | phrases     | `phrase_id\ttext`                              |
//! | enrollmap   | `model_id\tphrase_id\trep1,rep2,rep3`          |
//! | scores      | `trial_id\tscore\tPASS or PUNITIVE\tcer[\tlabel]` |
//! | det         | `#p_miss\tp_fa\tthreshold` header, then rows   |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::enrollfuse::{EnrollEntry, PhraseTable, ScoreRecord, TranscriptTable, REPETITIONS};
use crate::metrics::DetPoint;
use crate::simkit::SyntheticDataset;
use crate::textgate::{GateOutcome, Phrase, Transcript};
use crate::types::{IdError, ModelId, PhraseId, SpaceName, Trial, TrialId, TrialLabel, UtteranceId};
use crate::vector::Embedding;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("expected {expected} values, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("column {column}: cannot parse {token:?} as a number")]
    UnparseableFloat { column: usize, token: String },
    #[error("column {column}: value is not finite")]
    NonFinite { column: usize },
    #[error("expected {expected} tab-separated fields, found {found}")]
    BadFieldCount { expected: &'static str, found: usize },
    #[error("bad id: {0}")]
    BadId(#[from] IdError),
    #[error("unknown trial label {0:?}")]
    BadLabel(String),
    #[error("expected {REPETITIONS} comma-separated repetition ids, found {0}")]
    BadRepCount(usize),
    #[error("phrase text is empty")]
    EmptyPhrase,
    #[error("unknown gate outcome {0:?} (expected PASS or PUNITIVE)")]
    BadGate(String),
}

impl ParseErrorKind {
    pub fn class(&self) -> &'static str {
        match self {
            ParseErrorKind::BadHeader(_) => "BadHeader",
            ParseErrorKind::DimMismatch { .. } => "DimMismatch",
            ParseErrorKind::DuplicateId(_) => "DuplicateId",
            ParseErrorKind::UnparseableFloat { .. } => "UnparseableFloat",
            ParseErrorKind::NonFinite { .. } => "NonFinite",
            ParseErrorKind::BadFieldCount { .. } => "BadFieldCount",
            ParseErrorKind::BadId(_) => "BadId",
            ParseErrorKind::BadLabel(_) => "BadLabel",
            ParseErrorKind::BadRepCount(_) => "BadRepCount",
            ParseErrorKind::EmptyPhrase => "EmptyPhrase",
            ParseErrorKind::BadGate(_) => "BadGate",
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: cannot read: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: cannot write: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{file}:{line}: {kind}")]
    Parse {
        file: String,
        line: usize,
        kind: ParseErrorKind,
    },
}

impl IoError {
    pub fn class(&self) -> &'static str {
        match self {
            IoError::Read { .. } | IoError::Write { .. } => "Io",
            IoError::Parse { kind, .. } => kind.class(),
        }
    }
}

type Result<T, E = IoError> = std::result::Result<T, E>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-blank lines with their 1-based numbers, `\r` stripped.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

struct Ctx<'a> {
    file: &'a str,
    line: usize,
}

impl Ctx<'_> {
    fn err(&self, kind: impl Into<ParseErrorKind>) -> IoError {
        IoError::Parse {
            file: self.file.to_string(),
            line: self.line,
            kind: kind.into(),
        }
    }
}

fn fields<'a>(ctx: &Ctx, line: &'a str, expected: &'static str, ok: impl Fn(usize) -> bool) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = line.split('\t').collect();
    if !ok(f.len()) {
        return Err(ctx.err(ParseErrorKind::BadFieldCount {
            expected,
            found: f.len(),
        }));
    }
    Ok(f)
}

fn parse_float(ctx: &Ctx, token: &str, column: usize) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| {
        ctx.err(ParseErrorKind::UnparseableFloat {
            column,
            token: token.to_string(),
        })
    })?;
    if !v.is_finite() {
        return Err(ctx.err(ParseErrorKind::NonFinite { column }));
    }
    Ok(v)
}

/// Embeddings of one model space.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub table: BTreeMap<UtteranceId, Embedding>,
}

pub fn parse_embeddings_str(text: &str, file: &str) -> Result<EmbeddingTable> {
    let mut it = text.split('\n').enumerate();
    let header = it
        .next()
        .map(|(_, l)| l.strip_suffix('\r').unwrap_or(l))
        .unwrap_or("");
    let ctx = Ctx { file, line: 1 };
    let dim = header
        .strip_prefix("#dim ")
        .and_then(|d| d.trim().parse::<usize>().ok())
        .filter(|&d| d >= 1)
        .ok_or_else(|| ctx.err(ParseErrorKind::BadHeader(format!("expected `#dim <D>`, found {header:?}"))))?;

    let mut table = BTreeMap::new();
    for (line, l) in lines(text).filter(|(n, _)| *n > 1) {
        let ctx = Ctx { file, line };
        let f = fields(&ctx, l, "2", |n| n == 2)?;
        let id = UtteranceId::new(f[0]).map_err(|e| ctx.err(e))?;
        let tokens: Vec<&str> = f[1].split_ascii_whitespace().collect();
        if tokens.len() != dim {
            return Err(ctx.err(ParseErrorKind::DimMismatch {
                expected: dim,
                found: tokens.len(),
            }));
        }
        let values = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| parse_float(&ctx, t, i + 1))
            .collect::<Result<Vec<_>>>()?;
        let emb = Embedding::new(values).expect("finite and non-empty");
        if table.contains_key(&id) {
            return Err(ctx.err(ParseErrorKind::DuplicateId(id.to_string())));
        }
        table.insert(id, emb);
    }
    Ok(EmbeddingTable { dim, table })
}

pub fn parse_embeddings(path: &Path) -> Result<EmbeddingTable> {
    parse_embeddings_str(&read(path)?, &path.display().to_string())
}

/// Serializes with 17 significant digits, which round-trips every `f64`.
pub fn format_embeddings(table: &BTreeMap<UtteranceId, Embedding>, dim: usize) -> String {
    let mut out = format!("#dim {dim}\n");
    for (id, e) in table {
        out.push_str(id.as_str());
        out.push('\t');
        for (i, v) in e.values().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{v:.16e}").expect("string write");
        }
        out.push('\n');
    }
    out
}

pub fn write_embeddings(table: &BTreeMap<UtteranceId, Embedding>, dim: usize, path: &Path) -> Result<()> {
    write(path, &format_embeddings(table, dim))
}

pub fn parse_trials_str(text: &str, file: &str) -> Result<Vec<Trial>> {
    lines(text)
        .map(|(line, l)| {
            let ctx = Ctx { file, line };
            let f = fields(&ctx, l, "3 or 4", |n| n == 3 || n == 4)?;
            let label = f
                .get(3)
                .map(|s| s.parse::<TrialLabel>().map_err(|e| ctx.err(ParseErrorKind::BadLabel(e.0))))
                .transpose()?;
            Ok(Trial {
                trial_id: TrialId::new(f[0]).map_err(|e| ctx.err(e))?,
                model_id: ModelId::new(f[1]).map_err(|e| ctx.err(e))?,
                test_id: UtteranceId::new(f[2]).map_err(|e| ctx.err(e))?,
                label,
            })
        })
        .collect()
}

pub fn parse_trials(path: &Path) -> Result<Vec<Trial>> {
    parse_trials_str(&read(path)?, &path.display().to_string())
}

pub fn format_trials(trials: &[Trial]) -> String {
    let mut out = String::new();
    for t in trials {
        write!(out, "{}\t{}\t{}", t.trial_id, t.model_id, t.test_id).expect("string write");
        if let Some(l) = t.label {
            write!(out, "\t{l}").expect("string write");
        }
        out.push('\n');
    }
    out
}

/// `id\ttext` lines; the text is everything after the first tab.
fn keyed_text<'a>(ctx: &Ctx, l: &'a str) -> Result<(&'a str, &'a str)> {
    l.split_once('\t').ok_or_else(|| {
        ctx.err(ParseErrorKind::BadFieldCount {
            expected: "2",
            found: 1,
        })
    })
}

pub fn parse_transcripts_str(text: &str, file: &str) -> Result<TranscriptTable> {
    let mut out = TranscriptTable::new();
    for (line, l) in lines(text) {
        let ctx = Ctx { file, line };
        let (id, text) = keyed_text(&ctx, l)?;
        let utt_id = UtteranceId::new(id).map_err(|e| ctx.err(e))?;
        if out.contains_key(&utt_id) {
            return Err(ctx.err(ParseErrorKind::DuplicateId(id.to_string())));
        }
        out.insert(
            utt_id.clone(),
            Transcript {
                utt_id,
                text: text.to_string(),
            },
        );
    }
    Ok(out)
}

pub fn parse_transcripts(path: &Path) -> Result<TranscriptTable> {
    parse_transcripts_str(&read(path)?, &path.display().to_string())
}

pub fn format_transcripts<'a>(transcripts: impl IntoIterator<Item = &'a Transcript>) -> String {
    transcripts
        .into_iter()
        .map(|t| format!("{}\t{}\n", t.utt_id, t.text))
        .collect()
}

pub fn parse_phrases_str(text: &str, file: &str) -> Result<PhraseTable> {
    let mut out = PhraseTable::new();
    for (line, l) in lines(text) {
        let ctx = Ctx { file, line };
        let (id, text) = keyed_text(&ctx, l)?;
        let id = PhraseId::new(id).map_err(|e| ctx.err(e))?;
        if out.contains_key(&id) {
            return Err(ctx.err(ParseErrorKind::DuplicateId(id.to_string())));
        }
        let phrase = Phrase::new(id.clone(), text).map_err(|_| ctx.err(ParseErrorKind::EmptyPhrase))?;
        out.insert(id, phrase);
    }
    Ok(out)
}

pub fn parse_phrases(path: &Path) -> Result<PhraseTable> {
    parse_phrases_str(&read(path)?, &path.display().to_string())
}

pub fn format_phrases<'a>(phrases: impl IntoIterator<Item = &'a Phrase>) -> String {
    phrases
        .into_iter()
        .map(|p| format!("{}\t{}\n", p.id(), p.text()))
        .collect()
}

pub fn parse_enrollmap_str(text: &str, file: &str) -> Result<Vec<EnrollEntry>> {
    let mut out: Vec<EnrollEntry> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (line, l) in lines(text) {
        let ctx = Ctx { file, line };
        let f = fields(&ctx, l, "3", |n| n == 3)?;
        let model_id = ModelId::new(f[0]).map_err(|e| ctx.err(e))?;
        let phrase_id = PhraseId::new(f[1]).map_err(|e| ctx.err(e))?;
        let parts: Vec<&str> = f[2].split(',').collect();
        if parts.len() != REPETITIONS {
            return Err(ctx.err(ParseErrorKind::BadRepCount(parts.len())));
        }
        let reps = parts
            .iter()
            .map(|r| UtteranceId::new(r.trim()).map_err(|e| ctx.err(e)))
            .collect::<Result<Vec<_>>>()?;
        let rep_ids: [UtteranceId; REPETITIONS] = reps.try_into().expect("length checked");
        if !seen.insert(model_id.clone()) {
            return Err(ctx.err(ParseErrorKind::DuplicateId(model_id.to_string())));
        }
        out.push(EnrollEntry {
            model_id,
            phrase_id,
            rep_ids,
        });
    }
    Ok(out)
}

pub fn parse_enrollmap(path: &Path) -> Result<Vec<EnrollEntry>> {
    parse_enrollmap_str(&read(path)?, &path.display().to_string())
}

pub fn format_enrollmap(entries: &[EnrollEntry]) -> String {
    entries
        .iter()
        .map(|e| {
            let reps: Vec<&str> = e.rep_ids.iter().map(UtteranceId::as_str).collect();
            format!("{}\t{}\t{}\n", e.model_id, e.phrase_id, reps.join(","))
        })
        .collect()
}

/// Fixed-point with `-0.0` printed as `0.0`.
fn fixed(v: f64, decimals: usize) -> String {
    format!("{:.*}", decimals, v + 0.0)
}

pub fn format_scores(records: &[ScoreRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let gate = if r.gate.passed() { "PASS" } else { "PUNITIVE" };
        writeln!(
            out,
            "{}\t{}\t{gate}\t{}",
            r.trial_id,
            fixed(r.score, 6),
            fixed(r.gate.cer(), 4)
        )
        .expect("string write");
    }
    out
}

pub fn write_scores(records: &[ScoreRecord], path: &Path) -> Result<()> {
    write(path, &format_scores(records))
}

/// Reads a score file. Labels come from an optional fifth column.
pub fn parse_scores_str(text: &str, file: &str) -> Result<Vec<ScoreRecord>> {
    let mut seen = std::collections::BTreeSet::new();
    lines(text)
        .map(|(line, l)| {
            let ctx = Ctx { file, line };
            let f = fields(&ctx, l, "4 or 5", |n| n == 4 || n == 5)?;
            let trial_id = TrialId::new(f[0]).map_err(|e| ctx.err(e))?;
            if !seen.insert(trial_id.clone()) {
                return Err(ctx.err(ParseErrorKind::DuplicateId(trial_id.to_string())));
            }
            let score = parse_float(&ctx, f[1], 2)?;
            let cer = parse_float(&ctx, f[3], 4)?;
            let gate = match f[2] {
                "PASS" => GateOutcome::Pass(cer),
                "PUNITIVE" => GateOutcome::Fail(cer),
                other => return Err(ctx.err(ParseErrorKind::BadGate(other.to_string()))),
            };
            let label = f
                .get(4)
                .map(|s| s.parse::<TrialLabel>().map_err(|e| ctx.err(ParseErrorKind::BadLabel(e.0))))
                .transpose()?;
            Ok(ScoreRecord {
                trial_id,
                score,
                gate,
                label,
            })
        })
        .collect()
}

pub fn parse_scores(path: &Path) -> Result<Vec<ScoreRecord>> {
    parse_scores_str(&read(path)?, &path.display().to_string())
}

pub fn format_det(points: &[DetPoint]) -> String {
    let mut out = String::from("#p_miss\tp_fa\tthreshold\n");
    for p in points {
        writeln!(
            out,
            "{}\t{}\t{}",
            fixed(p.p_miss, 6),
            fixed(p.p_fa, 6),
            fixed(p.threshold, 6)
        )
        .expect("string write");
    }
    out
}

pub fn write_det(points: &[DetPoint], path: &Path) -> Result<()> {
    write(path, &format_det(points))
}

/// Locations of a dataset written by [`write_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub phrases: PathBuf,
    pub enrollmap: PathBuf,
    pub trials: PathBuf,
    pub transcripts: PathBuf,
    /// One file per space, in declared order.
    pub embeddings: Vec<(SpaceName, PathBuf)>,
}

impl DatasetPaths {
    pub fn in_dir(dir: &Path, spaces: &[SpaceName]) -> Self {
        Self {
            phrases: dir.join("phrases.tsv"),
            enrollmap: dir.join("enrollmap.tsv"),
            trials: dir.join("trials.tsv"),
            transcripts: dir.join("transcripts.tsv"),
            embeddings: spaces
                .iter()
                .map(|s| (s.clone(), dir.join(format!("emb_{s}.txt"))))
                .collect(),
        }
    }
}

/// Writes a synthetic dataset in the same formats the scorer reads.
pub fn write_dataset(ds: &SyntheticDataset, dir: &Path) -> Result<DatasetPaths> {
    fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let paths = DatasetPaths::in_dir(dir, ds.order.spaces());
    write(&paths.phrases, &format_phrases(&ds.phrases))?;
    write(&paths.enrollmap, &format_enrollmap(&ds.enrollments))?;
    write(&paths.trials, &format_trials(&ds.trials))?;
    write(&paths.transcripts, &format_transcripts(&ds.transcripts))?;
    for (space, path) in &paths.embeddings {
        let table = ds.embeddings.space(space).expect("declared space");
        let dim = table.values().next().map_or(1, Embedding::dim);
        write_embeddings(table, dim, path)?;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn class<T: std::fmt::Debug>(r: Result<T>) -> (&'static str, usize) {
        match r.unwrap_err() {
            IoError::Parse { line, kind, .. } => (kind.class(), line),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn minimal_embedding_file() {
        let t = parse_embeddings_str("#dim 2\nu1\t0.6 0.8\n", "e").unwrap();
        assert_eq!(t.dim, 2);
        assert_eq!(t.table[&UtteranceId::new("u1").unwrap()].values(), &[0.6, 0.8]);
        assert!(parse_embeddings_str("#dim 3\n", "e").unwrap().table.is_empty());
    }

    #[test]
    fn embedding_diagnostics() {
        assert_eq!(class(parse_embeddings_str("#dim 2\nu1\t0.6 0.8 1\n", "e")), ("DimMismatch", 2));
        assert_eq!(class(parse_embeddings_str("", "e")), ("BadHeader", 1));
        assert_eq!(class(parse_embeddings_str("#dim x\n", "e")), ("BadHeader", 1));
        assert_eq!(class(parse_embeddings_str("#dim 0\n", "e")), ("BadHeader", 1));
        assert_eq!(class(parse_embeddings_str("u1\t1 2\n", "e")), ("BadHeader", 1));
        assert_eq!(class(parse_embeddings_str("#dim 1\nu1\t1\n\nu1\t2\n", "e")), ("DuplicateId", 4));
        assert_eq!(class(parse_embeddings_str("#dim 2\nu1\t1 abc\n", "e")), ("UnparseableFloat", 2));
        assert_eq!(class(parse_embeddings_str("#dim 2\nu1\t1 NaN\n", "e")), ("NonFinite", 2));
        assert_eq!(class(parse_embeddings_str("#dim 2\nu1 1 2\n", "e")), ("BadFieldCount", 2));
        let err = parse_embeddings_str("#dim 2\nu1\t1 x\n", "emb.txt").unwrap_err();
        assert_eq!(err.to_string(), "emb.txt:2: column 2: cannot parse \"x\" as a number");
    }

    #[test]
    fn crlf_is_tolerated() {
        let t = parse_embeddings_str("#dim 1\r\nu1\t0.5\r\n", "e").unwrap();
        assert_eq!(t.table.len(), 1);
    }

    #[test]
    fn trial_lines() {
        let t = parse_trials_str("t1\tm1\tu1\tTW\nt2\tm1\tu2\n", "t").unwrap();
        assert_eq!(t[0].label, Some(TrialLabel::Tw));
        assert_eq!(t[1].label, None);
        assert_eq!(class(parse_trials_str("t1\tm1\tu1\tXX\n", "t")), ("BadLabel", 1));
        assert_eq!(class(parse_trials_str("t1\tm1\n", "t")), ("BadFieldCount", 1));
        assert_eq!(class(parse_trials_str("t1\t\tu1\n", "t")), ("BadId", 1));
        assert_eq!(format_trials(&t), "t1\tm1\tu1\tTW\nt2\tm1\tu2\n");
    }

    #[test]
    fn enrollmap_lines() {
        let e = parse_enrollmap_str("m1\tp1\ta,b,c\n", "m").unwrap();
        assert_eq!(e[0].rep_ids[2].as_str(), "c");
        assert_eq!(format_enrollmap(&e), "m1\tp1\ta,b,c\n");
        assert_eq!(class(parse_enrollmap_str("m1\tp1\ta,b\n", "m")), ("BadRepCount", 1));
        assert_eq!(class(parse_enrollmap_str("m1\tp1\ta,b,c,d\n", "m")), ("BadRepCount", 1));
        assert_eq!(class(parse_enrollmap_str("m1\tp1\ta,,b,c\n", "m")), ("BadRepCount", 1));
        assert_eq!(class(parse_enrollmap_str("m1\tp1\ta,b,c\nm1\tp2\td,e,f\n", "m")), ("DuplicateId", 2));
    }

    #[test]
    fn transcripts_and_phrases() {
        let t = parse_transcripts_str("u1\thello world\nu2\t\n", "x").unwrap();
        assert_eq!(t[&UtteranceId::new("u2").unwrap()].text, "");
        assert_eq!(class(parse_transcripts_str("u1\n", "x")), ("BadFieldCount", 1));
        assert_eq!(class(parse_transcripts_str("u1\ta\nu1\tb\n", "x")), ("DuplicateId", 2));
        let p = parse_phrases_str("p1\tصدای من\n", "p").unwrap();
        assert_eq!(p[&PhraseId::new("p1").unwrap()].text(), "صدای من");
        assert_eq!(class(parse_phrases_str("p1\t  \n", "p")), ("EmptyPhrase", 1));
    }

    #[test]
    fn score_lines() {
        let recs = vec![
            ScoreRecord {
                trial_id: TrialId::new("t1").unwrap(),
                score: 0.71234567,
                gate: GateOutcome::Pass(0.05),
                label: None,
            },
            ScoreRecord {
                trial_id: TrialId::new("t2").unwrap(),
                score: -1.0,
                gate: GateOutcome::Fail(0.91234),
                label: Some(TrialLabel::Iw),
            },
            ScoreRecord {
                trial_id: TrialId::new("t3").unwrap(),
                score: -0.0,
                gate: GateOutcome::Pass(0.0),
                label: None,
            },
        ];
        let text = format_scores(&recs);
        assert_eq!(
            text,
            "t1\t0.712346\tPASS\t0.0500\nt2\t-1.000000\tPUNITIVE\t0.9123\nt3\t0.000000\tPASS\t0.0000\n"
        );
        assert_eq!(format_scores(&[]), "");
        let back = parse_scores_str(&text, "s").unwrap();
        assert_eq!(back[1].score, -1.0);
        assert!(!back[1].gate.passed());
        let labeled = parse_scores_str("t1\t0.5\tPASS\t0.0\tTC\n", "s").unwrap();
        assert_eq!(labeled[0].label, Some(TrialLabel::Tc));
        assert_eq!(class(parse_scores_str("t1\t0.5\tMAYBE\t0.0\n", "s")), ("BadGate", 1));
        assert_eq!(class(parse_scores_str("t1\t0.5\tPASS\t0\nt1\t0.5\tPASS\t0\n", "s")), ("DuplicateId", 2));
    }

    #[test]
    fn det_format() {
        assert_eq!(format_det(&[]), "#p_miss\tp_fa\tthreshold\n");
        let p = DetPoint {
            p_miss: 0.5,
            p_fa: 0.25,
            threshold: -1.5,
        };
        assert_eq!(format_det(&[p]), "#p_miss\tp_fa\tthreshold\n0.500000\t0.250000\t-1.500000\n");
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let e = parse_trials(Path::new("/nonexistent/trials.tsv")).unwrap_err();
        assert_eq!(e.class(), "Io");
    }

    proptest! {
        #[test]
        fn embeddings_round_trip(rows in prop::collection::btree_map("[a-z0-9_]{1,8}", prop::collection::vec(-1e6f64..1e6, 3), 0..20)) {
            let table: BTreeMap<UtteranceId, Embedding> = rows
                .into_iter()
                .map(|(k, v)| (UtteranceId::new(k).unwrap(), Embedding::new(v).unwrap()))
                .collect();
            let back = parse_embeddings_str(&format_embeddings(&table, 3), "rt").unwrap();
            prop_assert_eq!(back.dim, 3);
            // 17 significant digits restore every double exactly
            prop_assert_eq!(back.table, table);
        }
    }
}
