use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use tdsv::metrics::{self, LabeledScores};
use tdsv::{DcfParams, ScoreRecord, SubsetMode, TrialLabel};

/// Evaluation summary. Key order and float formatting are fixed so reports
/// compare byte for byte.
#[derive(Debug, Serialize)]
pub struct Report {
    subset: String,
    n_target: usize,
    n_nontarget: usize,
    counts: LabelCounts,
    c_miss: f64,
    c_fa: f64,
    p_target: f64,
    norm_const: f64,
    min_dcf: f64,
    min_dcf_raw: f64,
    threshold: f64,
    eer: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "UPPERCASE")]
struct LabelCounts {
    tc: usize,
    tw: usize,
    ic: usize,
    iw: usize,
}

impl LabelCounts {
    fn new(counts: &BTreeMap<TrialLabel, usize>) -> Self {
        let get = |l| counts.get(&l).copied().unwrap_or(0);
        Self {
            tc: get(TrialLabel::Tc),
            tw: get(TrialLabel::Tw),
            ic: get(TrialLabel::Ic),
            iw: get(TrialLabel::Iw),
        }
    }
}

impl Report {
    pub fn new(mode: &SubsetMode, subset: &[ScoreRecord], scores: &LabeledScores, params: &DcfParams) -> Self {
        let m = metrics::min_dcf(scores, params);
        Self {
            subset: mode.to_string(),
            n_target: scores.targets().len(),
            n_nontarget: scores.nontargets().len(),
            counts: LabelCounts::new(&metrics::label_counts(subset)),
            c_miss: params.c_miss(),
            c_fa: params.c_fa(),
            p_target: params.p_target(),
            norm_const: params.norm_const(),
            min_dcf: m.normalized,
            min_dcf_raw: m.raw,
            threshold: m.threshold,
            eer: metrics::eer(scores),
        }
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k}={v}").expect("string write");
        kv("subset", self.subset.clone());
        kv("n_target", self.n_target.to_string());
        kv("n_nontarget", self.n_nontarget.to_string());
        let c = &self.counts;
        for (label, n) in [("TC", c.tc), ("TW", c.tw), ("IC", c.ic), ("IW", c.iw)] {
            kv(&format!("count_{label}"), n.to_string());
        }
        kv("c_miss", self.c_miss.to_string());
        kv("c_fa", self.c_fa.to_string());
        kv("p_target", self.p_target.to_string());
        kv("min_dcf", format!("{:.6}", self.min_dcf));
        kv("min_dcf_raw", format!("{:.6}", self.min_dcf_raw));
        kv("eer", format!("{:.6}", self.eer));
        kv("threshold", format!("{:.6}", self.threshold + 0.0));
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
