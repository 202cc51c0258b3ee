use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dialogue::{Modality, Utterance};

use super::AssistError;

const DEFAULT_CUES: &str = include_str!("../../data/latent-cues.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LatentLabel {
    Purpose,
    Methods,
    Conclusion,
    None,
}

impl LatentLabel {
    pub const ALL: [LatentLabel; 4] =
        [LatentLabel::Purpose, LatentLabel::Methods, LatentLabel::Conclusion, LatentLabel::None];

    pub fn as_str(self) -> &'static str {
        match self {
            LatentLabel::Purpose => "PURPOSE",
            LatentLabel::Methods => "METHODS",
            LatentLabel::Conclusion => "CONCLUSION",
            LatentLabel::None => "NONE",
        }
    }
}

impl fmt::Display for LatentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LatentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown latent label {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Cue {
    label: LatentLabel,
    words: Vec<String>,
}

/// Cue-phrase table for [`classify_latent`].
#[derive(Debug, Clone, PartialEq)]
pub struct CueTable {
    cues: Vec<Cue>,
}

impl Default for CueTable {
    fn default() -> Self {
        Self::parse(DEFAULT_CUES).expect("bundled cue table parses")
    }
}

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl CueTable {
    pub fn parse(text: &str) -> Result<Self, AssistError> {
        let mut cues = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let err = |message: String| AssistError::Table { what: "cue", line: i + 1, message };
            let (label, phrase) =
                line.split_once('\t').ok_or_else(|| err("expected LABEL<TAB>phrase".into()))?;
            let label: LatentLabel = label.trim().parse().map_err(err)?;
            if label == LatentLabel::None {
                return Err(err("NONE cannot be a cue label".into()));
            }
            let words = words(phrase);
            if words.is_empty() {
                return Err(err("empty cue phrase".into()));
            }
            cues.push(Cue { label, words });
        }
        Ok(CueTable { cues })
    }

    pub fn len(&self) -> usize {
        self.cues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cues.is_empty()
    }

    /// Label of the cue occurring earliest in `text`; longer cues win ties.
    pub fn classify_text(&self, text: &str) -> LatentLabel {
        let toks = words(text);
        let mut best: Option<(usize, std::cmp::Reverse<usize>, usize)> = None;
        for (ci, cue) in self.cues.iter().enumerate() {
            let n = cue.words.len();
            if let Some(pos) = toks.windows(n).position(|w| w == cue.words.as_slice()) {
                let key = (pos, std::cmp::Reverse(n), ci);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        best.map_or(LatentLabel::None, |(_, _, ci)| self.cues[ci].label)
    }
}

pub fn classify_latent(utterance: &Utterance, cues: &CueTable) -> LatentLabel {
    if utterance.modality != Modality::Speech {
        return LatentLabel::None;
    }
    cues.classify_text(&utterance.text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_phrases() {
        let t = CueTable::default();
        assert_eq!(t.classify_text("our goal is to choose a vendor"), LatentLabel::Purpose);
        assert_eq!(t.classify_text("so we conclude we take option two"), LatentLabel::Conclusion);
        assert_eq!(t.classify_text("lunch was nice"), LatentLabel::None);
        assert_eq!(t.classify_text(""), LatentLabel::None);
    }

    #[test]
    fn matches_whole_words_only() {
        let t = CueTable::parse("PURPOSE\tgoal\n").unwrap();
        assert_eq!(t.classify_text("goalkeeper"), LatentLabel::None);
        assert_eq!(t.classify_text("The GOAL."), LatentLabel::Purpose);
    }

    #[test]
    fn earliest_then_longest() {
        let t = CueTable::parse("METHODS\tlook\nPURPOSE\tgoal\nCONCLUSION\tgoal is\n").unwrap();
        assert_eq!(t.classify_text("look, the goal is"), LatentLabel::Methods);
        assert_eq!(t.classify_text("the goal is"), LatentLabel::Conclusion);
    }

    #[test]
    fn bad_tables() {
        assert!(CueTable::parse("WHATEVER\tx\n").is_err());
        assert!(CueTable::parse("PURPOSE x\n").is_err());
        assert!(CueTable::parse("NONE\tx\n").is_err());
    }
}
