use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dialogue::{Meeting, TurnSpan};
use crate::ids::UtteranceId;
use crate::text::{cosine, Analyzer};

use super::AssistError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCandidate {
    /// Index of the last turn before the boundary.
    pub after_turn: usize,
    /// First utterance of the turn that opens the new segment.
    pub first_utterance: UtteranceId,
    pub cohesion: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProposal {
    /// Cohesion at every gap; entry `g` sits between turns `g` and `g + 1`.
    pub cohesion: Vec<f64>,
    pub candidates: Vec<BoundaryCandidate>,
    /// Set when the meeting is too short for the requested window.
    pub warning: Option<String>,
}

/// Lexical-cohesion segmentation over turns. Each gap compares the `window`
/// turns on either side (clipped at the meeting edges); a gap becomes a
/// candidate when its depth relative to the surrounding peaks reaches
/// `threshold`.
pub fn propose_issue_boundaries(
    meeting: &Meeting,
    window: usize,
    threshold: f64,
    analyzer: &Analyzer,
) -> Result<BoundaryProposal, AssistError> {
    if window == 0 {
        return Err(AssistError::BadWindow);
    }
    let n = meeting.turns.len();
    if n < 2 * window {
        return Ok(BoundaryProposal {
            cohesion: Vec::new(),
            candidates: Vec::new(),
            warning: Some(format!(
                "meeting {} has {n} turns, fewer than twice the window of {window}",
                meeting.id
            )),
        });
    }
    let counts: Vec<BTreeMap<String, u32>> = (0..n)
        .map(|t| analyzer.term_counts(&meeting.span_text(TurnSpan::single(t))))
        .collect();
    let block = |lo: usize, hi: usize| {
        let mut acc = BTreeMap::new();
        for c in &counts[lo..=hi] {
            for (k, v) in c {
                *acc.entry(k.clone()).or_insert(0) += v;
            }
        }
        acc
    };
    let cohesion: Vec<f64> = (0..n - 1)
        .map(|g| {
            let left = block((g + 1).saturating_sub(window), g);
            let right = block(g + 1, (g + window).min(n - 1));
            cosine(&left, &right)
        })
        .collect();

    let mut candidates = Vec::new();
    for (g, &s) in cohesion.iter().enumerate() {
        let mut left_peak = s;
        for &v in cohesion[..g].iter().rev() {
            if v < left_peak {
                break;
            }
            left_peak = v;
        }
        let mut right_peak = s;
        for &v in &cohesion[g + 1..] {
            if v < right_peak {
                break;
            }
            right_peak = v;
        }
        let depth = (left_peak - s) + (right_peak - s);
        if depth >= threshold {
            candidates.push(BoundaryCandidate {
                after_turn: g,
                first_utterance: meeting.turns[g + 1].utterances[0].clone(),
                cohesion: s,
                depth,
            });
        }
    }
    Ok(BoundaryProposal { cohesion, candidates, warning: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::{parse_transcript, TranscriptFormat, Vocabulary};

    fn meeting(texts: &[&str]) -> Meeting {
        let raw: String = texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let spk = if i % 2 == 0 { "A" } else { "B" };
                format!("M\tu{}\t{spk}\t{i}\t{i}.5\tspeech\t\t{t}\n", i + 1)
            })
            .collect();
        parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &Vocabulary::default_swbd_damsl())
            .unwrap()
    }

    #[test]
    fn two_topics_split_in_the_middle() {
        let m = meeting(&[
            "printer vendor price",
            "printer vendor warranty",
            "vendor printer toner",
            "training budget course",
            "budget course staff",
            "training staff budget",
        ]);
        let p = propose_issue_boundaries(&m, 2, 0.5, &Analyzer::default()).unwrap();
        assert_eq!(p.cohesion.len(), 5);
        assert_eq!(p.candidates.len(), 1);
        assert_eq!(p.candidates[0].after_turn, 2);
        assert_eq!(p.candidates[0].first_utterance, "u4");
        assert_eq!(p.candidates[0].cohesion, 0.0);
    }

    #[test]
    fn short_meeting_warns() {
        let m = meeting(&["a b", "c d", "e f"]);
        let p = propose_issue_boundaries(&m, 2, 0.1, &Analyzer::default()).unwrap();
        assert!(p.candidates.is_empty());
        assert!(p.warning.is_some());
        assert_eq!(
            propose_issue_boundaries(&m, 0, 0.1, &Analyzer::default()),
            Err(AssistError::BadWindow)
        );
    }
}
