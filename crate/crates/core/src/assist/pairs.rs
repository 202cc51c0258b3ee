use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dialogue::Meeting;
use crate::ids::UtteranceId;

use super::AssistError;

const DEFAULT_PATTERNS: &str = include_str!("../../data/adjacency.patterns");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    QuestionAnswer,
    ProposeAccept,
    ProposeReject,
    IssueSolution,
}

impl PairKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PairKind::QuestionAnswer => "question-answer",
            PairKind::ProposeAccept => "propose-accept",
            PairKind::ProposeReject => "propose-reject",
            PairKind::IssueSolution => "issue-solution",
        }
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            PairKind::QuestionAnswer,
            PairKind::ProposeAccept,
            PairKind::ProposeReject,
            PairKind::IssueSolution,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| format!("unknown pair kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyPair {
    pub kind: PairKind,
    pub first_turn: usize,
    pub second_turn: usize,
    pub first_utterance: UtteranceId,
    pub second_utterance: UtteranceId,
    pub confidence: f64,
}

impl AdjacencyPair {
    pub fn id(&self) -> String {
        format!("pair:{}>{}", self.first_utterance, self.second_utterance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRule {
    pub kind: PairKind,
    pub first: BTreeSet<String>,
    pub second: BTreeSet<String>,
    pub weight: f64,
}

/// Pattern table mapping dialogue-act tag sets to pair kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPatterns {
    pub rules: Vec<PairRule>,
    /// Turns allowed strictly between the two parts.
    pub max_gap: usize,
    /// Confidence multiplier per intervening turn.
    pub decay: f64,
}

impl Default for PairPatterns {
    fn default() -> Self {
        Self::parse(DEFAULT_PATTERNS).expect("bundled pattern table parses")
    }
}

impl PairPatterns {
    pub fn parse(text: &str) -> Result<Self, AssistError> {
        let mut out = PairPatterns { rules: Vec::new(), max_gap: 2, decay: 1.0 };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| AssistError::Table { what: "pattern", line: i + 1, message };
            let words: Vec<&str> = line.split_whitespace().collect();
            let unit = |s: &str| -> Result<f64, AssistError> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| (0.0..=1.0).contains(v))
                    .ok_or_else(|| err(format!("{s:?} is not a number in [0, 1]")))
            };
            let tags = |s: &str| -> BTreeSet<String> {
                s.split(',').filter(|t| !t.is_empty()).map(str::to_owned).collect()
            };
            match words.as_slice() {
                ["max_gap", n] => {
                    out.max_gap = n.parse().map_err(|_| err(format!("bad max_gap {n:?}")))?
                }
                ["decay", x] => out.decay = unit(x)?,
                ["pair", kind, first, second, weight] => out.rules.push(PairRule {
                    kind: kind.parse().map_err(err)?,
                    first: tags(first),
                    second: tags(second),
                    weight: unit(weight)?,
                }),
                _ => return Err(err(format!("cannot read {line:?}"))),
            }
        }
        Ok(out)
    }
}

/// Finds adjacency pairs. Each second part is matched to the closest
/// preceding first part of the same rule, uttered in an earlier turn by a
/// different speaker and separated by at most `max_gap` intervening turns.
pub fn detect_adjacency_pairs(meeting: &Meeting, patterns: &PairPatterns) -> Vec<AdjacencyPair> {
    let tags_by_turn: Vec<Vec<(&UtteranceId, &BTreeSet<String>)>> = meeting
        .turns
        .iter()
        .map(|t| {
            t.utterances
                .iter()
                .filter_map(|uid| meeting.utterance(uid.as_str()))
                .map(|u| (&u.id, &u.da_tags))
                .collect()
        })
        .collect();
    let mut pairs = Vec::new();
    for (j, turn) in meeting.turns.iter().enumerate() {
        for (second_utt, tags) in &tags_by_turn[j] {
            for rule in &patterns.rules {
                if tags.is_disjoint(&rule.second) {
                    continue;
                }
                let earliest = j.saturating_sub(patterns.max_gap + 1);
                let found = (earliest..j).rev().find_map(|i| {
                    if meeting.turns[i].speaker == turn.speaker {
                        return None;
                    }
                    tags_by_turn[i]
                        .iter()
                        .rev()
                        .find(|(_, t)| !t.is_disjoint(&rule.first))
                        .map(|(uid, _)| (i, *uid))
                });
                if let Some((i, first_utt)) = found {
                    let gap = (j - i - 1) as i32;
                    pairs.push(AdjacencyPair {
                        kind: rule.kind,
                        first_turn: i,
                        second_turn: j,
                        first_utterance: first_utt.clone(),
                        second_utterance: (*second_utt).clone(),
                        confidence: rule.weight * patterns.decay.powi(gap),
                    });
                }
            }
        }
    }
    pairs.sort_by(|a, b| {
        (a.first_turn, a.second_turn, a.kind, &a.second_utterance)
            .cmp(&(b.first_turn, b.second_turn, b.kind, &b.second_utterance))
    });
    pairs.dedup_by(|a, b| {
        a.kind == b.kind
            && a.first_utterance == b.first_utterance
            && a.second_utterance == b.second_utterance
    });
    pairs
}
