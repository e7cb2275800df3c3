//! Detection metrics over labeled scores.
//!
//! Decision rule: a trial is accepted iff `score >= threshold`. Candidate
//! thresholds are one below the lowest score, the midpoints between adjacent
//! distinct scores, and one above the highest score, which visits every
//! distinct operating point exactly once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::enrollfuse::ScoreRecord;
use crate::scalar::Scalar;
use crate::types::TrialLabel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no target (TC) scores")]
    NoTargets,
    #[error("no non-target scores")]
    NoNonTargets,
    #[error("{0} record(s) carry no trial label")]
    UnlabeledRecords(usize),
    #[error("subset has {targets} target and {nontargets} non-target record(s); need at least one of each")]
    EmptySide { targets: usize, nontargets: usize },
    #[error("score is not finite")]
    NonFiniteScore,
    #[error("invalid DCF parameters: {0}")]
    BadParams(&'static str),
}

impl MetricsError {
    pub fn class(&self) -> &'static str {
        match self {
            MetricsError::NoTargets => "NoTargets",
            MetricsError::NoNonTargets => "NoNonTargets",
            MetricsError::UnlabeledRecords(_) => "UnlabeledRecords",
            MetricsError::EmptySide { .. } => "EmptySide",
            MetricsError::NonFiniteScore => "NonFiniteScore",
            MetricsError::BadParams(_) => "BadParams",
        }
    }
}

/// Detection cost parameters. The normalizer is always derived from the
/// three primaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcfParams<T: Scalar = f64> {
    c_miss: T,
    c_fa: T,
    p_target: T,
}

impl<T: Scalar> DcfParams<T> {
    pub fn new(c_miss: T, c_fa: T, p_target: T) -> Result<Self, MetricsError> {
        if !(c_miss.is_finite() && c_miss > T::zero()) {
            return Err(MetricsError::BadParams("c_miss must be > 0"));
        }
        if !(c_fa.is_finite() && c_fa > T::zero()) {
            return Err(MetricsError::BadParams("c_fa must be > 0"));
        }
        if !(p_target > T::zero() && p_target < T::one()) {
            return Err(MetricsError::BadParams("p_target must lie in (0, 1)"));
        }
        Ok(Self {
            c_miss,
            c_fa,
            p_target,
        })
    }

    pub fn c_miss(&self) -> T {
        self.c_miss
    }

    pub fn c_fa(&self) -> T {
        self.c_fa
    }

    pub fn p_target(&self) -> T {
        self.p_target
    }

    /// Cost of the better of the two trivial systems (accept all, reject all).
    pub fn norm_const(&self) -> T {
        (self.c_miss * self.p_target).min(self.c_fa * (T::one() - self.p_target))
    }
}

impl<T: Scalar> Default for DcfParams<T> {
    /// C_miss 10, C_fa 1, P_target 0.01.
    fn default() -> Self {
        Self::new(T::lit(10.0), T::one(), T::lit(0.01)).expect("defaults are valid")
    }
}

/// Miss and false-alarm rates at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRates<T: Scalar = f64> {
    pub p_miss: T,
    pub p_fa: T,
    pub threshold: T,
    pub n_target: usize,
    pub n_nontarget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dcf<T: Scalar = f64> {
    pub raw: T,
    pub normalized: T,
}

pub fn dcf<T: Scalar>(rates: &ErrorRates<T>, params: &DcfParams<T>) -> Dcf<T> {
    let raw = params.c_miss * rates.p_miss * params.p_target
        + params.c_fa * rates.p_fa * (T::one() - params.p_target);
    Dcf {
        raw,
        normalized: raw / params.norm_const(),
    }
}

/// Target and non-target scores, each sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores<T: Scalar = f64> {
    targets: Vec<T>,
    nontargets: Vec<T>,
}

impl<T: Scalar> LabeledScores<T> {
    pub fn new(mut targets: Vec<T>, mut nontargets: Vec<T>) -> Result<Self, MetricsError> {
        if targets.is_empty() {
            return Err(MetricsError::NoTargets);
        }
        if nontargets.is_empty() {
            return Err(MetricsError::NoNonTargets);
        }
        if targets.iter().chain(&nontargets).any(|s| !s.is_finite()) {
            return Err(MetricsError::NonFiniteScore);
        }
        let by_value = |a: &T, b: &T| a.partial_cmp(b).expect("finite scores");
        targets.sort_by(by_value);
        nontargets.sort_by(by_value);
        Ok(Self {
            targets,
            nontargets,
        })
    }

    /// Splits records by label; TC is the only target label.
    pub fn from_records(records: &[ScoreRecord<T>]) -> Result<Self, MetricsError> {
        let unlabeled = records.iter().filter(|r| r.label.is_none()).count();
        if unlabeled > 0 {
            return Err(MetricsError::UnlabeledRecords(unlabeled));
        }
        let (t, n): (Vec<_>, Vec<_>) = records
            .iter()
            .partition(|r| r.label.is_some_and(TrialLabel::is_target));
        Self::new(
            t.iter().map(|r| r.score).collect(),
            n.iter().map(|r| r.score).collect(),
        )
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn nontargets(&self) -> &[T] {
        &self.nontargets
    }
}

/// Error rates at every threshold that changes the confusion counts,
/// ascending by threshold.
pub fn sweep<T: Scalar>(scores: &LabeledScores<T>) -> Vec<ErrorRates<T>> {
    let (tgt, non) = (&scores.targets, &scores.nontargets);
    let (nt, nn) = (tgt.len(), non.len());
    let (ft, fn_) = (T::from_count(nt), T::from_count(nn));
    let rates = |misses: usize, rejected_non: usize, threshold: T| ErrorRates {
        p_miss: T::from_count(misses) / ft,
        p_fa: T::from_count(nn - rejected_non) / fn_,
        threshold,
        n_target: nt,
        n_nontarget: nn,
    };

    let lowest = tgt[0].min(non[0]);
    let mut out = vec![rates(0, 0, lowest - T::one())];
    // i, j: how many targets / non-targets are <= the current distinct score
    let (mut i, mut j) = (0, 0);
    while i < nt || j < nn {
        let current = match (tgt.get(i), non.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < nt && tgt[i] <= current {
            i += 1;
        }
        while j < nn && non[j] <= current {
            j += 1;
        }
        let next = match (tgt.get(i), non.get(j)) {
            (Some(&a), Some(&b)) => Some(a.min(b)),
            (Some(&a), None) => Some(a),
            (None, Some(&b)) => Some(b),
            (None, None) => None,
        };
        let threshold = match next {
            Some(n) => (current + n) / T::lit(2.0),
            None => current + T::one(),
        };
        out.push(rates(i, j, threshold));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinDcf<T: Scalar = f64> {
    pub normalized: T,
    pub raw: T,
    pub threshold: T,
    pub p_miss: T,
    pub p_fa: T,
}

/// Minimum normalized DCF over the sweep; ties go to the smallest threshold.
pub fn min_dcf<T: Scalar>(scores: &LabeledScores<T>, params: &DcfParams<T>) -> MinDcf<T> {
    let mut best: Option<MinDcf<T>> = None;
    for r in sweep(scores) {
        let d = dcf(&r, params);
        if best.is_none_or(|b| d.normalized < b.normalized) {
            best = Some(MinDcf {
                normalized: d.normalized,
                raw: d.raw,
                threshold: r.threshold,
                p_miss: r.p_miss,
                p_fa: r.p_fa,
            });
        }
    }
    best.expect("sweep is never empty")
}

/// Equal error rate.
///
/// If a sweep point lies on the diagonal its rate is returned; otherwise the
/// segment between the two sweep points bracketing the crossing is
/// intersected with `p_miss == p_fa`.
pub fn eer<T: Scalar>(scores: &LabeledScores<T>) -> T {
    eer_from_sweep(&sweep(scores))
}

fn eer_from_sweep<T: Scalar>(points: &[ErrorRates<T>]) -> T {
    // gap = p_fa - p_miss is non-increasing along the sweep
    let gap = |r: &ErrorRates<T>| r.p_fa - r.p_miss;
    if let Some(p) = points.iter().find(|r| gap(r) == T::zero()) {
        return p.p_miss;
    }
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (ga, gb) = (gap(a), gap(b));
        if ga > T::zero() && gb < T::zero() {
            let s = ga / (ga - gb);
            return a.p_miss + s * (b.p_miss - a.p_miss);
        }
    }
    // No bracketing segment: midpoint of the point closest to the diagonal.
    let closest = points
        .iter()
        .min_by(|a, b| {
            gap(a)
                .abs()
                .partial_cmp(&gap(b).abs())
                .expect("finite rates")
        })
        .expect("sweep is never empty");
    (closest.p_miss + closest.p_fa) / T::lit(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint<T: Scalar = f64> {
    pub p_miss: T,
    pub p_fa: T,
    pub threshold: T,
}

/// Distinct (p_miss, p_fa) operating points ordered by threshold.
pub fn det_points<T: Scalar>(scores: &LabeledScores<T>) -> Vec<DetPoint<T>> {
    let mut out: Vec<DetPoint<T>> = Vec::new();
    for r in sweep(scores) {
        if out
            .last()
            .is_some_and(|p| p.p_miss == r.p_miss && p.p_fa == r.p_fa)
        {
            continue;
        }
        out.push(DetPoint {
            p_miss: r.p_miss,
            p_fa: r.p_fa,
            threshold: r.threshold,
        });
    }
    out
}

/// Which labeled trials take part in an evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SubsetMode {
    #[default]
    All,
    TcVsTw,
    TcVsIc,
    TcVsIw,
    Custom(BTreeSet<TrialLabel>),
}

impl SubsetMode {
    /// Labels kept by this mode; `None` keeps everything.
    pub fn labels(&self) -> Option<BTreeSet<TrialLabel>> {
        let pair = |l| Some([TrialLabel::Tc, l].into_iter().collect());
        match self {
            SubsetMode::All => None,
            SubsetMode::TcVsTw => pair(TrialLabel::Tw),
            SubsetMode::TcVsIc => pair(TrialLabel::Ic),
            SubsetMode::TcVsIw => pair(TrialLabel::Iw),
            SubsetMode::Custom(set) => Some(set.clone()),
        }
    }
}

impl fmt::Display for SubsetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetMode::All => f.write_str("all"),
            SubsetMode::TcVsTw => f.write_str("tc-vs-tw"),
            SubsetMode::TcVsIc => f.write_str("tc-vs-ic"),
            SubsetMode::TcVsIw => f.write_str("tc-vs-iw"),
            SubsetMode::Custom(set) => {
                let names: Vec<_> = set.iter().map(|l| l.as_str()).collect();
                f.write_str(&names.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown subset mode {0:?}")]
pub struct BadSubset(pub String);

impl FromStr for SubsetMode {
    type Err = BadSubset;

    /// Accepts the named modes or a comma-separated label list such as `TC,IW`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(SubsetMode::All),
            "tc-vs-tw" => Ok(SubsetMode::TcVsTw),
            "tc-vs-ic" => Ok(SubsetMode::TcVsIc),
            "tc-vs-iw" => Ok(SubsetMode::TcVsIw),
            _ => s
                .split(',')
                .map(|l| l.trim().parse::<TrialLabel>())
                .collect::<Result<BTreeSet<_>, _>>()
                .map(SubsetMode::Custom)
                .map_err(|_| BadSubset(s.to_string())),
        }
    }
}

/// Filters records to the labels of `mode`, preserving order.
pub fn select_subset<T: Scalar>(
    records: &[ScoreRecord<T>],
    mode: &SubsetMode,
) -> Result<Vec<ScoreRecord<T>>, MetricsError> {
    let unlabeled = records.iter().filter(|r| r.label.is_none()).count();
    if unlabeled > 0 {
        return Err(MetricsError::UnlabeledRecords(unlabeled));
    }
    let keep = mode.labels();
    let out: Vec<_> = records
        .iter()
        .filter(|r| {
            keep.as_ref()
                .is_none_or(|k| k.contains(&r.label.expect("checked above")))
        })
        .cloned()
        .collect();
    let targets = out
        .iter()
        .filter(|r| r.label.is_some_and(TrialLabel::is_target))
        .count();
    let nontargets = out.len() - targets;
    if targets == 0 || nontargets == 0 {
        return Err(MetricsError::EmptySide {
            targets,
            nontargets,
        });
    }
    Ok(out)
}

pub fn label_counts<T: Scalar>(records: &[ScoreRecord<T>]) -> BTreeMap<TrialLabel, usize> {
    let mut counts: BTreeMap<TrialLabel, usize> = TrialLabel::ALL.iter().map(|&l| (l, 0)).collect();
    for l in records.iter().filter_map(|r| r.label) {
        *counts.entry(l).or_default() += 1;
    }
    counts
}
