use std::collections::HashSet;

use crate::ids::{DocumentId, MeetingId, ParticipantId, UtteranceId};

use super::{DialogueError, Document, Meeting, Modality, Participant, Utterance, Vocabulary};

/// Input formats accepted by [`parse_transcript`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptFormat {
    /// One utterance per line: meeting_id, utt_id, speaker, start_s, end_s,
    /// modality, da_tags, text. Lines starting with `#` are comments; a
    /// comment of the form `#@ key = value` carries meeting metadata
    /// (`title`, `date`, `participant = ID | name | role`,
    /// `document = ID | title | text`).
    Tsv,
    /// The canonical store document (see [`crate::store`]).
    StructuredDoc,
}

pub fn parse_transcript(
    raw: &[u8],
    format: TranscriptFormat,
    vocabulary: &Vocabulary,
) -> Result<Meeting, DialogueError> {
    let text = std::str::from_utf8(raw).map_err(|_| DialogueError::Decode)?;
    match format {
        TranscriptFormat::Tsv => parse_tsv(text, vocabulary),
        TranscriptFormat::StructuredDoc => {
            if text.trim().is_empty() {
                return Err(DialogueError::EmptyTranscript);
            }
            let meeting = crate::store::from_canonical(raw)?;
            for u in &meeting.utterances {
                vocabulary.check_all(u.da_tags.iter().map(String::as_str))?;
            }
            Ok(meeting)
        }
    }
}

fn parse_tsv(text: &str, vocabulary: &Vocabulary) -> Result<Meeting, DialogueError> {
    let mut meeting_id: Option<String> = None;
    let mut title = None;
    let mut date = None;
    let mut participants: Vec<Participant> = Vec::new();
    let mut documents = Vec::new();
    let mut utterances = Vec::new();
    let mut seen_ids = HashSet::new();

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let malformed = |reason: String| DialogueError::Malformed { line: line_no, reason };
        if let Some(meta) = line.strip_prefix("#@") {
            let (key, value) = meta
                .split_once('=')
                .ok_or_else(|| malformed("metadata needs `key = value`".into()))?;
            let value = value.trim();
            match key.trim() {
                "title" => title = Some(value.to_owned()),
                "date" => date = Some(value.to_owned()),
                "participant" => {
                    let mut parts = value.split('|').map(str::trim);
                    let id = parts.next().filter(|s| !s.is_empty());
                    let id = id.ok_or_else(|| malformed("participant needs an id".into()))?;
                    let name = parts.next().filter(|s| !s.is_empty()).unwrap_or(id);
                    let role = parts.next().filter(|s| !s.is_empty()).map(str::to_owned);
                    if participants.iter().any(|p| p.id == id) {
                        return Err(malformed(format!("participant {id} declared twice")));
                    }
                    participants.push(Participant {
                        id: ParticipantId::new(id),
                        name: name.to_owned(),
                        role,
                    });
                }
                "document" => {
                    let mut parts = value.splitn(3, '|').map(str::trim);
                    let id = parts.next().filter(|s| !s.is_empty());
                    let id = id.ok_or_else(|| malformed("document needs an id".into()))?;
                    let title = parts.next().unwrap_or_default().to_owned();
                    let text = parts.next().unwrap_or_default().to_owned();
                    documents.push(Document { id: DocumentId::new(id), title, text });
                }
                other => return Err(malformed(format!("unknown metadata key {other:?}"))),
            }
            continue;
        }
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(8, '\t').collect();
        if fields.len() != 8 {
            return Err(malformed(format!("expected 8 tab-separated fields, found {}", fields.len())));
        }
        let mid = fields[0].trim();
        match &meeting_id {
            None => meeting_id = Some(mid.to_owned()),
            Some(existing) if existing != mid => {
                return Err(malformed(format!("meeting id {mid} differs from {existing}")));
            }
            Some(_) => {}
        }
        let uid = fields[1].trim();
        if uid.is_empty() || !seen_ids.insert(uid.to_owned()) {
            return Err(malformed(format!("missing or duplicate utterance id {uid:?}")));
        }
        let speaker = fields[2].trim();
        if speaker.is_empty() {
            return Err(malformed("speaker is empty".into()));
        }
        let parse_time = |s: &str, what: &str| -> Result<f64, DialogueError> {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(format!("{what} {s:?} is not a number of seconds")))
        };
        let start = parse_time(fields[3], "start")?;
        let end = parse_time(fields[4], "end")?;
        if start > end {
            return Err(DialogueError::InvertedInterval { line: line_no, start, end });
        }
        let modality: Modality = fields[5].trim().parse().map_err(malformed)?;
        let da_tags = fields[6]
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect::<std::collections::BTreeSet<_>>();
        vocabulary.check_all(da_tags.iter().map(String::as_str))?;
        let text = fields[7].to_owned();
        if modality == Modality::Speech && text.trim().is_empty() {
            return Err(malformed("speech utterance without text".into()));
        }
        utterances.push(Utterance {
            id: UtteranceId::new(uid),
            speaker: ParticipantId::new(speaker),
            start,
            end,
            modality,
            text,
            da_tags,
        });
    }

    let Some(meeting_id) = meeting_id else {
        return Err(DialogueError::EmptyTranscript);
    };
    // stable: equal start times keep input order
    utterances.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut meeting = Meeting::from_utterances(
        MeetingId::new(meeting_id.clone()),
        title.unwrap_or(meeting_id),
        date,
        participants,
        utterances,
    )?;
    meeting.documents = documents;
    Ok(meeting)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::default_swbd_damsl()
    }

    #[test]
    fn four_lines_three_turns() {
        let raw = "M\tu1\tA\t0\t1\tspeech\t\thello\n\
                   M\tu2\tA\t1\t2\tspeech\tstatement\tthere\n\
                   M\tu3\tB\t2\t3\tspeech\t\tyes\n\
                   M\tu4\tA\t3\t4\tspeech\t\tok\n";
        let m = parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &vocab()).unwrap();
        assert_eq!(m.turns.len(), 3);
        assert_eq!(m.turns[0].utterances.len(), 2);
        assert_eq!(m.episodes.len(), 1);
        assert_eq!(m.root().turn_span.unwrap().last, 2);
        assert_eq!((m.root().start, m.root().end), (0.0, 4.0));
    }

    #[test]
    fn empty_stream_is_rejected() {
        for raw in ["", "# only a comment\n\n"] {
            let err = parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &vocab()).unwrap_err();
            assert_eq!(err.to_string(), "empty transcript");
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let raw = "# header\nM\tu1\tA\t0\t1\tspeech\t\thi\nM\tu2\tB\toops\n";
        match parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &vocab()) {
            Err(DialogueError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn start_after_end_is_rejected() {
        let raw = "M\tu1\tA\t5\t1\tspeech\t\thi\n";
        assert!(matches!(
            parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &vocab()),
            Err(DialogueError::InvertedInterval { line: 1, .. })
        ));
    }

    #[test]
    fn out_of_order_input_is_sorted_stably() {
        let raw = "M\tu2\tB\t2\t3\tspeech\t\tsecond\n\
                   M\tu1\tA\t0\t1\tspeech\t\tfirst\n\
                   M\tu3\tC\t2\t2.5\tspeech\t\ttie\n";
        let m = parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &vocab()).unwrap();
        let ids: Vec<_> = m.utterances.iter().map(|u| u.id.as_str()).collect();
        assert_eq!(ids, ["u1", "u2", "u3"]);
    }

    #[test]
    fn unknown_tag_and_bad_utf8() {
        let raw = "M\tu1\tA\t0\t1\tspeech\tzzz\thi\n";
        assert!(matches!(
            parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &vocab()),
            Err(DialogueError::UnknownTag { .. })
        ));
        assert!(matches!(
            parse_transcript(&[0xff, 0xfe], TranscriptFormat::Tsv, &vocab()),
            Err(DialogueError::Decode)
        ));
    }

    #[test]
    fn silence_has_empty_text_and_metadata_is_read() {
        let raw = "#@ title = Weekly\n#@ participant = A | Anna | chair\n\
                   M\tu1\tA\t0\t1\tspeech\tquestion\tany objection?\n\
                   M\tu2\tB\t1\t3\tsilence\t\t\n";
        let m = parse_transcript(raw.as_bytes(), TranscriptFormat::Tsv, &vocab()).unwrap();
        assert_eq!(m.title, "Weekly");
        assert_eq!(m.participants[0].role.as_deref(), Some("chair"));
        assert_eq!(m.participants.len(), 2);
        assert_eq!(m.utterances[1].modality, Modality::Silence);
    }
}
