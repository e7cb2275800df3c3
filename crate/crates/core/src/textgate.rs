//! Phrase-content verification.
//!
//! An ASR hypothesis is compared with the phrase claimed by the enrollment
//! using the character error rate. Text is NFC-normalized and trimmed of
//! leading and trailing whitespace; no case folding and no inner whitespace
//! collapsing. Distances count Unicode code points, spaces included.

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::scalar::Scalar;
use crate::types::{PhraseId, UtteranceId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextGateError {
    #[error("reference phrase is empty after normalization")]
    EmptyReference,
    #[error("CER threshold must be finite and non-negative")]
    BadThreshold,
    #[error("punitive score must be finite and at most -1.0")]
    BadPunitiveScore,
}

impl TextGateError {
    pub fn class(&self) -> &'static str {
        match self {
            TextGateError::EmptyReference => "EmptyReference",
            TextGateError::BadThreshold => "BadThreshold",
            TextGateError::BadPunitiveScore => "BadPunitiveScore",
        }
    }
}

/// A reference phrase from the fixed phrase set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    id: PhraseId,
    text: String,
}

impl Phrase {
    pub fn new(id: PhraseId, text: impl Into<String>) -> Result<Self, TextGateError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(TextGateError::EmptyReference);
        }
        Ok(Self { id, text })
    }

    pub fn id(&self) -> &PhraseId {
        &self.id
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// ASR hypothesis for a test utterance. May be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub utt_id: UtteranceId,
    pub text: String,
}

/// NFC-normalizes and trims leading/trailing whitespace.
pub fn normalize_text(s: &str) -> String {
    let nfc: String = s.nfc().collect();
    nfc.trim().to_string()
}

/// Levenshtein distance over NFC-normalized code points.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.nfc().collect();
    let b: Vec<char> = b.nfc().collect();
    edit_distance_chars(&a, &b)
}

/// Levenshtein distance between two code point sequences, with a single
/// DP row sized by the shorter input.
pub fn edit_distance_chars(a: &[char], b: &[char]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, &lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let sub = diag + usize::from(lc != sc);
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(diag + 1);
        }
    }
    row[short.len()]
}

/// Character error rate of `hypothesis` against `reference`.
///
/// Not clipped at 1.0: a hypothesis much longer than the reference yields
/// a CER above one.
pub fn cer<T: Scalar>(hypothesis: &str, reference: &str) -> Result<T, TextGateError> {
    let reference: Vec<char> = normalize_text(reference).chars().collect();
    if reference.is_empty() {
        return Err(TextGateError::EmptyReference);
    }
    let hypothesis: Vec<char> = normalize_text(hypothesis).chars().collect();
    let d = edit_distance_chars(&hypothesis, &reference);
    Ok(T::from_count(d) / T::from_count(reference.len()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateConfig<T: Scalar = f64> {
    cer_threshold: T,
    punitive_score: T,
    enabled: bool,
}

impl<T: Scalar> GateConfig<T> {
    pub fn new(cer_threshold: T, punitive_score: T) -> Result<Self, TextGateError> {
        if !cer_threshold.is_finite() || cer_threshold < T::zero() {
            return Err(TextGateError::BadThreshold);
        }
        if !punitive_score.is_finite() || punitive_score > -T::one() {
            return Err(TextGateError::BadPunitiveScore);
        }
        Ok(Self {
            cer_threshold,
            punitive_score,
            enabled: true,
        })
    }

    /// Same configuration with the gate switched off: every trial passes and
    /// its CER is still reported.
    pub fn disabled(self) -> Self {
        Self {
            enabled: false,
            ..self
        }
    }

    pub fn cer_threshold(&self) -> T {
        self.cer_threshold
    }

    pub fn punitive_score(&self) -> T {
        self.punitive_score
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }
}

impl<T: Scalar> Default for GateConfig<T> {
    /// CER threshold 0.3, punitive score -1.0.
    fn default() -> Self {
        Self::new(T::lit(0.3), -T::one()).expect("defaults are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOutcome<T: Scalar = f64> {
    Pass(T),
    Fail(T),
}

impl<T: Scalar> GateOutcome<T> {
    pub fn passed(&self) -> bool {
        matches!(self, GateOutcome::Pass(_))
    }

    pub fn cer(&self) -> T {
        match *self {
            GateOutcome::Pass(c) | GateOutcome::Fail(c) => c,
        }
    }
}

/// Passes iff the hypothesis CER against the reference is within the threshold.
pub fn gate<T: Scalar>(
    hypothesis: &Transcript,
    reference: &Phrase,
    cfg: &GateConfig<T>,
) -> Result<GateOutcome<T>, TextGateError> {
    let c = cer::<T>(&hypothesis.text, &reference.text)?;
    if !cfg.enabled || c <= cfg.cer_threshold {
        Ok(GateOutcome::Pass(c))
    } else {
        Ok(GateOutcome::Fail(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn transcript(text: &str) -> Transcript {
        Transcript {
            utt_id: UtteranceId::new("u1").unwrap(),
            text: text.to_string(),
        }
    }

    fn phrase(text: &str) -> Phrase {
        Phrase::new(PhraseId::new("p1").unwrap(), text).unwrap()
    }

    /// Full-matrix Levenshtein used as an independent reference.
    fn dp_oracle(a: &[char], b: &[char]) -> usize {
        let mut m = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in m.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in m[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let c = if a[i - 1] == b[j - 1] { 0 } else { 1 };
                m[i][j] = (m[i - 1][j] + 1).min(m[i][j - 1] + 1).min(m[i - 1][j - 1] + c);
            }
        }
        m[a.len()][b.len()]
    }

    #[test]
    fn edit_distance_examples() {
        assert_eq!(edit_distance("abc", "abc"), 0);
        assert_eq!(edit_distance("abc", "abd"), 1);
        assert_eq!(edit_distance("ab", ""), 2);
        assert_eq!(edit_distance("", ""), 0);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
    }

    #[test]
    fn edit_distance_normalizes_to_nfc() {
        // precomposed vs decomposed e-acute
        assert_eq!(edit_distance("caf\u{e9}", "cafe\u{301}"), 0);
        // Persian: alef with madda above, precomposed vs combining
        assert_eq!(edit_distance("\u{622}", "\u{627}\u{653}"), 0);
    }

    #[test]
    fn cer_examples() {
        assert_eq!(cer::<f64>("hello", "hello").unwrap(), 0.0);
        assert_eq!(cer::<f64>("hallo", "hello").unwrap(), 0.2);
        assert_eq!(cer::<f64>("", "ab").unwrap(), 1.0);
        assert_eq!(cer::<f64>("abcdef", "ab").unwrap(), 2.0);
        assert_eq!(cer::<f64>("x", "  \t").unwrap_err(), TextGateError::EmptyReference);
        // only outer whitespace is trimmed
        assert_eq!(cer::<f64>("  hello ", "hello").unwrap(), 0.0);
        assert_eq!(cer::<f64>("he llo", "hello").unwrap(), 0.2);
    }

    #[test]
    fn gate_examples() {
        let cfg = GateConfig::<f64>::default();
        assert_eq!(cfg.cer_threshold(), 0.3);
        assert_eq!(cfg.punitive_score(), -1.0);
        assert_eq!(
            gate(&transcript("hello"), &phrase("hello"), &cfg).unwrap(),
            GateOutcome::Pass(0.0)
        );
        let strict = GateConfig::new(0.1, -1.0).unwrap();
        assert_eq!(
            gate(&transcript("hallo"), &phrase("hello"), &strict).unwrap(),
            GateOutcome::Fail(0.2)
        );
        assert_eq!(
            gate(&transcript("hallo"), &phrase("hello"), &strict.disabled()).unwrap(),
            GateOutcome::Pass(0.2)
        );
    }

    #[test]
    fn gate_config_validation() {
        assert_eq!(GateConfig::new(-0.1, -1.0).unwrap_err(), TextGateError::BadThreshold);
        assert_eq!(GateConfig::new(f64::NAN, -1.0).unwrap_err(), TextGateError::BadThreshold);
        assert_eq!(GateConfig::new(0.3, -0.5).unwrap_err(), TextGateError::BadPunitiveScore);
        assert!(GateConfig::new(0.0, -5.0).is_ok());
    }

    #[test]
    fn phrase_rejects_blank_text() {
        assert!(Phrase::new(PhraseId::new("p").unwrap(), "   ").is_err());
    }

    fn mixed_string(max_len: usize) -> impl Strategy<Value = String> {
        // Latin letters, a space and a handful of Persian letters
        let alphabet: Vec<char> = "abcde ابپتسشمن".chars().collect();
        prop::collection::vec(prop::sample::select(alphabet), 0..=max_len)
            .prop_map(|cs| cs.into_iter().collect())
    }

    proptest! {
        #[test]
        fn edit_distance_matches_oracle(a in mixed_string(20), b in mixed_string(20)) {
            let ca: Vec<char> = a.chars().collect();
            let cb: Vec<char> = b.chars().collect();
            prop_assert_eq!(edit_distance(&a, &b), dp_oracle(&ca, &cb));
        }

        #[test]
        fn edit_distance_is_a_metric(a in mixed_string(20), b in mixed_string(20), c in mixed_string(20)) {
            let ab = edit_distance(&a, &b);
            prop_assert_eq!(ab, edit_distance(&b, &a));
            prop_assert_eq!(edit_distance(&a, &a), 0);
            prop_assert!(edit_distance(&a, &c) <= ab + edit_distance(&b, &c));
            let (la, lb) = (a.chars().count(), b.chars().count());
            prop_assert!(ab >= la.abs_diff(lb));
            prop_assert!(ab <= la.max(lb));
        }

        #[test]
        fn gate_is_monotone_in_threshold(h in mixed_string(12), r in mixed_string(12), t in 0.0f64..2.0, dt in 0.0f64..2.0) {
            prop_assume!(!r.trim().is_empty());
            let p = phrase(&r);
            let hyp = transcript(&h);
            let lo = gate(&hyp, &p, &GateConfig::new(t, -1.0).unwrap()).unwrap();
            let hi = gate(&hyp, &p, &GateConfig::new(t + dt, -1.0).unwrap()).unwrap();
            prop_assert!(!lo.passed() || hi.passed());
        }

        #[test]
        fn zero_threshold_passes_only_exact_matches(h in mixed_string(8), r in mixed_string(8)) {
            prop_assume!(!r.trim().is_empty());
            let out = gate(&transcript(&h), &phrase(&r), &GateConfig::new(0.0, -1.0).unwrap()).unwrap();
            prop_assert_eq!(out.passed(), normalize_text(&h) == normalize_text(&r));
        }
    }
}
