use std::collections::HashSet;

use crate::ids::{EpisodeId, TurnId, UtteranceId};
use crate::mds::{ArgLabel, Category, Episode};

use super::{DialogueError, Meeting, Modality, Turn, TurnSpan, Utterance};

/// Groups utterances into maximal same-speaker runs. A silence always forms
/// a turn of its own.
pub fn segment_turns(utterances: &[Utterance]) -> Result<Vec<Turn>, DialogueError> {
    let mut turns: Vec<Turn> = Vec::new();
    let mut prev: Option<&Utterance> = None;
    for u in utterances {
        let continues = match prev {
            Some(p) => {
                if p.start > u.start {
                    return Err(DialogueError::Unordered(u.id.clone()));
                }
                p.speaker == u.speaker
                    && p.modality != Modality::Silence
                    && u.modality != Modality::Silence
            }
            None => false,
        };
        if continues {
            turns.last_mut().expect("previous turn").utterances.push(u.id.clone());
        } else {
            turns.push(Turn {
                id: TurnId::new(format!("t{}", turns.len() + 1)),
                speaker: u.speaker.clone(),
                utterances: vec![u.id.clone()],
            });
        }
        prev = Some(u);
    }
    Ok(turns)
}

/// Splits the meeting root into contiguous first-level episodes at the given
/// topic-shift utterances. Each boundary must open a turn.
pub fn mark_topic_shifts(
    meeting: &Meeting,
    boundaries: &[UtteranceId],
) -> Result<Meeting, DialogueError> {
    if !meeting.root().children.is_empty() {
        return Err(DialogueError::AlreadySegmented);
    }
    let mut starts = Vec::new();
    let mut seen = HashSet::new();
    for b in boundaries {
        if !seen.insert(b.as_str()) {
            return Err(DialogueError::DuplicateBoundary(b.clone()));
        }
        let turn = meeting
            .turn_of(b.as_str())
            .ok_or_else(|| DialogueError::UnknownUtterance(b.clone()))?;
        if meeting.turns[turn].utterances[0] != *b {
            return Err(DialogueError::BoundarySplitsTurn(b.clone()));
        }
        if turn == 0 {
            return Err(DialogueError::EmptySegment(b.clone()));
        }
        starts.push(turn);
    }
    starts.sort_unstable();
    starts.insert(0, 0);

    let next = meeting
        .episodes
        .iter()
        .filter_map(|e| e.id.as_str().strip_prefix('e')?.parse::<usize>().ok())
        .max()
        .map_or(1, |n| n + 1);
    let mut out = meeting.clone();
    let root_pos = out.episode_positions()[out.episode_root.as_str()];
    for (i, &first) in starts.iter().enumerate() {
        let last = starts.get(i + 1).map_or(meeting.turns.len() - 1, |n| n - 1);
        let span = TurnSpan::new(first, last);
        let (start, end) = meeting.span_interval(span);
        let id = EpisodeId::new(format!("e{}", next + i));
        out.episodes[root_pos].children.push(id.clone());
        out.episodes.push(Episode {
            id,
            label: ArgLabel::new(Category::Discussion),
            start,
            end,
            turn_span: Some(span),
            parent: Some(meeting.episode_root.clone()),
            children: Vec::new(),
            attributed_speaker: Some(meeting.turns[first].speaker.clone()),
            target: None,
        });
    }
    out.normalize_episode_order();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::ParticipantId;

    fn utt(id: &str, speaker: &str, start: f64) -> Utterance {
        Utterance {
            id: id.into(),
            speaker: ParticipantId::new(speaker),
            start,
            end: start + 1.0,
            modality: Modality::Speech,
            text: format!("text of {id}"),
            da_tags: Default::default(),
        }
    }

    fn speakers(turns: &[Turn]) -> Vec<&str> {
        turns.iter().map(|t| t.speaker.as_str()).collect()
    }

    #[test]
    fn singleton_and_speaker_changes() {
        assert_eq!(segment_turns(&[utt("u1", "A", 0.0)]).unwrap().len(), 1);
        let turns = segment_turns(&[
            utt("u1", "A", 0.0),
            utt("u2", "A", 1.0),
            utt("u3", "B", 2.0),
            utt("u4", "A", 3.0),
        ])
        .unwrap();
        assert_eq!(speakers(&turns), ["A", "B", "A"]);
        assert_eq!(turns[0].utterances.len(), 2);
        assert_eq!(turns[2].id.as_str(), "t3");
    }

    #[test]
    fn unordered_input_is_an_error() {
        let err = segment_turns(&[utt("u1", "A", 2.0), utt("u2", "B", 1.0)]).unwrap_err();
        assert!(matches!(err, DialogueError::Unordered(id) if id.as_str() == "u2"));
    }

    #[test]
    fn silence_occupies_its_own_turn() {
        let mut quiet = utt("u2", "A", 1.0);
        quiet.modality = Modality::Silence;
        quiet.text.clear();
        let turns = segment_turns(&[utt("u1", "A", 0.0), quiet, utt("u3", "A", 2.0)]).unwrap();
        assert_eq!(turns.len(), 3);
    }

    fn meeting() -> Meeting {
        Meeting::from_utterances(
            "M".into(),
            "m".into(),
            None,
            vec![],
            vec![
                utt("u1", "A", 0.0),
                utt("u2", "B", 1.0),
                utt("u3", "B", 2.0),
                utt("u4", "C", 3.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn no_boundaries_gives_one_child() {
        let m = mark_topic_shifts(&meeting(), &[]).unwrap();
        assert_eq!(m.root().children.len(), 1);
        assert_eq!(m.episodes[1].turn_span, Some(TurnSpan::new(0, 2)));
    }

    #[test]
    fn boundary_splits_at_turn_start() {
        let m = mark_topic_shifts(&meeting(), &["u4".into()]).unwrap();
        let spans: Vec<_> = m.episodes[1..].iter().map(|e| e.turn_span.unwrap()).collect();
        assert_eq!(spans, [TurnSpan::new(0, 1), TurnSpan::new(2, 2)]);
        assert_eq!(m.episodes[2].start, 3.0);
    }

    #[test]
    fn boundary_errors() {
        let m = meeting();
        assert!(matches!(
            mark_topic_shifts(&m, &["u3".into()]),
            Err(DialogueError::BoundarySplitsTurn(_))
        ));
        assert!(matches!(
            mark_topic_shifts(&m, &["u9".into()]),
            Err(DialogueError::UnknownUtterance(_))
        ));
        assert!(matches!(
            mark_topic_shifts(&m, &["u4".into(), "u4".into()]),
            Err(DialogueError::DuplicateBoundary(_))
        ));
        let once = mark_topic_shifts(&m, &[]).unwrap();
        assert!(matches!(
            mark_topic_shifts(&once, &[]),
            Err(DialogueError::AlreadySegmented)
        ));
    }
}
