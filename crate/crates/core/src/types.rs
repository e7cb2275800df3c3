//! Identifier newtypes, trial labels and trials.

use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("identifier is empty")]
    Empty,
    #[error("identifier {0:?} contains a tab, newline or carriage return")]
    ForbiddenChar(String),
}

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Result<Self, IdError> {
                let s = s.into();
                if s.is_empty() {
                    return Err(IdError::Empty);
                }
                if s.contains(['\t', '\n', '\r']) {
                    return Err(IdError::ForbiddenChar(s));
                }
                Ok(Self(s))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl FromStr for $name {
            type Err = IdError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }
    };
}

id_type!(
    /// Identifies one utterance (an enrollment repetition or a test utterance).
    UtteranceId
);
id_type!(
    /// Identifies an enrollment model.
    ModelId
);
id_type!(PhraseId);
id_type!(TrialId);
id_type!(
    /// Name of an embedding model space, e.g. one extractor's output.
    SpaceName
);

/// Trial type: speaker match crossed with phrase match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrialLabel {
    /// Target speaker, correct phrase. The only target label.
    Tc,
    /// Target speaker, wrong phrase.
    Tw,
    /// Impostor, correct phrase.
    Ic,
    /// Impostor, wrong phrase.
    Iw,
}

impl TrialLabel {
    pub const ALL: [TrialLabel; 4] = [TrialLabel::Tc, TrialLabel::Tw, TrialLabel::Ic, TrialLabel::Iw];

    pub fn is_target(self) -> bool {
        self == TrialLabel::Tc
    }

    pub fn same_speaker(self) -> bool {
        matches!(self, TrialLabel::Tc | TrialLabel::Tw)
    }

    pub fn same_phrase(self) -> bool {
        matches!(self, TrialLabel::Tc | TrialLabel::Ic)
    }

    pub fn from_parts(same_speaker: bool, same_phrase: bool) -> Self {
        match (same_speaker, same_phrase) {
            (true, true) => TrialLabel::Tc,
            (true, false) => TrialLabel::Tw,
            (false, true) => TrialLabel::Ic,
            (false, false) => TrialLabel::Iw,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TrialLabel::Tc => "TC",
            TrialLabel::Tw => "TW",
            TrialLabel::Ic => "IC",
            TrialLabel::Iw => "IW",
        }
    }
}

impl fmt::Display for TrialLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown trial label {0:?} (expected TC, TW, IC or IW)")]
pub struct BadLabel(pub String);

impl FromStr for TrialLabel {
    type Err = BadLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "TC" => Ok(TrialLabel::Tc),
            "TW" => Ok(TrialLabel::Tw),
            "IC" => Ok(TrialLabel::Ic),
            "IW" => Ok(TrialLabel::Iw),
            _ => Err(BadLabel(s.to_string())),
        }
    }
}

/// One verification attempt: an enrollment model against a test utterance.
/// The label is present for evaluation and absent for blind scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub trial_id: TrialId,
    pub model_id: ModelId,
    pub test_id: UtteranceId,
    pub label: Option<TrialLabel>,
}
