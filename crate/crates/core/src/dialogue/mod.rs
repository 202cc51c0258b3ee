//! Shallow dialogue structure: utterances, turns, participants and the
//! meeting record that carries them.

mod transcript;
mod turns;
mod vocab;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ids::{DocumentId, EpisodeId, MeetingId, ParticipantId, TurnId, UtteranceId};
use crate::mds::{ArgLabel, Category, Episode, ReplyToEdge};

pub use transcript::{parse_transcript, TranscriptFormat};
pub use turns::{mark_topic_shifts, segment_turns};
pub use vocab::{attach_dialogue_acts, Vocabulary};

#[derive(Debug, thiserror::Error)]
pub enum DialogueError {
    #[error("transcript is not valid UTF-8")]
    Decode,
    #[error("empty transcript")]
    EmptyTranscript,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: start {start} is after end {end}")]
    InvertedInterval { line: usize, start: f64, end: f64 },
    #[error("utterances are not ordered by start time at {0}")]
    Unordered(UtteranceId),
    #[error("unknown utterance {0}")]
    UnknownUtterance(UtteranceId),
    #[error("boundary at {0} splits a turn")]
    BoundarySplitsTurn(UtteranceId),
    #[error("boundary {0} listed twice")]
    DuplicateBoundary(UtteranceId),
    #[error("boundary at {0} would leave an empty episode")]
    EmptySegment(UtteranceId),
    #[error("meeting already has first-level episodes")]
    AlreadySegmented,
    #[error("unknown dialogue act tag {tag:?}; nearest: {}", .suggestions.join(", "))]
    UnknownTag { tag: String, suggestions: Vec<String> },
    #[error("vocabulary line {line}: {reason}")]
    Vocabulary { line: usize, reason: String },
    #[error("inconsistent meeting: {0}")]
    Integrity(String),
    #[error("structured document: {0}")]
    Json(#[from] serde_json::Error),
}

/// Channel an utterance was produced in. Non-speech acts such as applause or
/// a meaningful silence are utterances too.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modality {
    Speech,
    Gesture,
    VocalNonverbal,
    Silence,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Speech => "speech",
            Modality::Gesture => "gesture",
            Modality::VocalNonverbal => "vocal-nonverbal",
            Modality::Silence => "silence",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "speech" => Ok(Modality::Speech),
            "gesture" => Ok(Modality::Gesture),
            "vocal-nonverbal" => Ok(Modality::VocalNonverbal),
            "silence" => Ok(Modality::Silence),
            other => Err(format!("unknown modality {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub id: UtteranceId,
    pub speaker: ParticipantId,
    pub start: f64,
    pub end: f64,
    pub modality: Modality,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub da_tags: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub id: TurnId,
    pub speaker: ParticipantId,
    pub utterances: Vec<UtteranceId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub id: ParticipantId,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
}

/// A document related to the meeting (agenda, handout, slides).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: DocumentId,
    #[serde(default)]
    pub title: String,
    pub text: String,
}

/// Inclusive range of turns, stored as 0-based positions into
/// [`Meeting::turns`] and written as `t<first>..t<last>` with 1-based numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TurnSpan {
    pub first: usize,
    pub last: usize,
}

impl TurnSpan {
    pub fn new(first: usize, last: usize) -> Self {
        debug_assert!(first <= last);
        Self { first, last }
    }

    pub fn single(turn: usize) -> Self {
        Self::new(turn, turn)
    }

    pub fn contains(&self, other: &TurnSpan) -> bool {
        self.first <= other.first && other.last <= self.last
    }

    pub fn overlaps(&self, other: &TurnSpan) -> bool {
        self.first <= other.last && other.first <= self.last
    }

    pub fn turn_count(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn turns(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }
}

impl fmt::Display for TurnSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}..t{}", self.first + 1, self.last + 1)
    }
}

impl FromStr for TurnSpan {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        fn turn_number(part: &str) -> Result<usize, String> {
            let digits = part.trim().strip_prefix('t').unwrap_or(part.trim());
            match digits.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(n - 1),
                _ => Err(format!("bad turn reference {part:?}")),
            }
        }
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (turn_number(a)?, turn_number(b)?),
            None => {
                let n = turn_number(s)?;
                (n, n)
            }
        };
        if first > last {
            return Err(format!("turn span {s:?} runs backwards"));
        }
        Ok(TurnSpan { first, last })
    }
}

impl Serialize for TurnSpan {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TurnSpan {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The full annotated record of one meeting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meeting {
    pub id: MeetingId,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
    pub participants: Vec<Participant>,
    pub utterances: Vec<Utterance>,
    pub turns: Vec<Turn>,
    pub episode_root: EpisodeId,
    /// Episode arena in depth-first preorder, root first.
    pub episodes: Vec<Episode>,
    #[serde(default)]
    pub reply_to: Vec<ReplyToEdge>,
    #[serde(default)]
    pub documents: Vec<Document>,
}

impl Meeting {
    /// Builds an unannotated meeting: turns from speaker changes and a single
    /// MEETING root spanning everything.
    pub fn from_utterances(
        id: MeetingId,
        title: String,
        date: Option<String>,
        mut participants: Vec<Participant>,
        utterances: Vec<Utterance>,
    ) -> Result<Self, DialogueError> {
        if utterances.is_empty() {
            return Err(DialogueError::EmptyTranscript);
        }
        let turns = segment_turns(&utterances)?;
        for u in &utterances {
            if !participants.iter().any(|p| p.id == u.speaker) {
                participants.push(Participant {
                    id: u.speaker.clone(),
                    name: u.speaker.to_string(),
                    role: None,
                });
            }
        }
        let start = utterances.iter().map(|u| u.start).fold(f64::INFINITY, f64::min);
        let end = utterances.iter().map(|u| u.end).fold(f64::NEG_INFINITY, f64::max);
        let root = Episode {
            id: EpisodeId::new("e0"),
            label: ArgLabel::new(Category::Meeting),
            start,
            end,
            turn_span: Some(TurnSpan::new(0, turns.len() - 1)),
            parent: None,
            children: Vec::new(),
            attributed_speaker: Some(turns[0].speaker.clone()),
            target: None,
        };
        let meeting = Meeting {
            id,
            title,
            date,
            participants,
            utterances,
            turns,
            episode_root: root.id.clone(),
            episodes: vec![root],
            reply_to: Vec::new(),
            documents: Vec::new(),
        };
        meeting.check_integrity()?;
        Ok(meeting)
    }

    pub fn utterance(&self, id: &str) -> Option<&Utterance> {
        self.utterances.iter().find(|u| u.id == *id)
    }

    pub fn participant(&self, id: &str) -> Option<&Participant> {
        self.participants.iter().find(|p| p.id == *id)
    }

    pub fn episode(&self, id: &str) -> Option<&Episode> {
        self.episodes.iter().find(|e| e.id == *id)
    }

    pub fn root(&self) -> &Episode {
        self.episode(self.episode_root.as_str())
            .expect("meeting root episode is present")
    }

    /// Position of every episode in the arena, keyed by id.
    pub fn episode_positions(&self) -> HashMap<&str, usize> {
        self.episodes
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect()
    }

    /// Reply-to targets of an episode (empty when it replies to nothing).
    pub fn replies_of(&self, id: &str) -> &[EpisodeId] {
        self.reply_to
            .iter()
            .find(|e| e.from == *id)
            .map(|e| e.to.as_slice())
            .unwrap_or(&[])
    }

    /// Time interval covered by a span of turns.
    pub fn span_interval(&self, span: TurnSpan) -> (f64, f64) {
        let mut start = f64::INFINITY;
        let mut end = f64::NEG_INFINITY;
        let by_id: HashMap<&str, &Utterance> =
            self.utterances.iter().map(|u| (u.id.as_str(), u)).collect();
        for t in span.turns() {
            for uid in &self.turns[t].utterances {
                let u = by_id[uid.as_str()];
                start = start.min(u.start);
                end = end.max(u.end);
            }
        }
        (start, end)
    }

    /// Concatenated text of the utterances in a span of turns.
    pub fn span_text(&self, span: TurnSpan) -> String {
        let by_id: HashMap<&str, &Utterance> =
            self.utterances.iter().map(|u| (u.id.as_str(), u)).collect();
        let mut out = String::new();
        for t in span.turns() {
            for uid in &self.turns[t].utterances {
                let text = &by_id[uid.as_str()].text;
                if text.is_empty() {
                    continue;
                }
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(text);
            }
        }
        out
    }

    /// Index of the turn that contains an utterance.
    pub fn turn_of(&self, utterance: &str) -> Option<usize> {
        self.turns
            .iter()
            .position(|t| t.utterances.iter().any(|u| u == utterance))
    }

    /// Rewrites the episode arena into depth-first preorder.
    pub(crate) fn normalize_episode_order(&mut self) {
        let positions: HashMap<String, usize> = self
            .episodes
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.to_string(), i))
            .collect();
        let mut order = Vec::with_capacity(self.episodes.len());
        let mut stack = vec![positions[self.episode_root.as_str()]];
        while let Some(i) = stack.pop() {
            order.push(i);
            for child in self.episodes[i].children.iter().rev() {
                stack.push(positions[child.as_str()]);
            }
        }
        let mut slots: Vec<Option<Episode>> = self.episodes.drain(..).map(Some).collect();
        self.episodes = order.into_iter().filter_map(|i| slots[i].take()).collect();
    }

    /// Structural consistency of the record: unique ids, turns partitioning
    /// the utterances, a single well-formed episode tree and resolvable
    /// reply-to edges. Grammar conformance is a separate concern, see
    /// [`crate::mds::validate`].
    pub fn check_integrity(&self) -> Result<(), DialogueError> {
        let fail = |msg: String| Err(DialogueError::Integrity(msg));
        if self.utterances.is_empty() {
            return Err(DialogueError::EmptyTranscript);
        }
        let mut seen = HashSet::new();
        for p in &self.participants {
            if !seen.insert(p.id.as_str()) {
                return fail(format!("participant {} listed twice", p.id));
            }
        }
        let mut utt_ids = HashSet::new();
        for (i, u) in self.utterances.iter().enumerate() {
            if !utt_ids.insert(u.id.as_str()) {
                return fail(format!("utterance {} listed twice", u.id));
            }
            if u.speaker.as_str().is_empty() {
                return fail(format!("utterance {} has no speaker", u.id));
            }
            if !seen.contains(u.speaker.as_str()) {
                return fail(format!("speaker {} of {} is not a participant", u.speaker, u.id));
            }
            if u.start > u.end {
                return fail(format!("utterance {} starts after it ends", u.id));
            }
            if u.modality == Modality::Speech && u.text.is_empty() {
                return fail(format!("speech utterance {} has no text", u.id));
            }
            if i > 0 && self.utterances[i - 1].start > u.start {
                return fail(format!("utterance {} is out of order", u.id));
            }
        }
        let flattened: Vec<&UtteranceId> =
            self.turns.iter().flat_map(|t| t.utterances.iter()).collect();
        if flattened.len() != self.utterances.len()
            || flattened.iter().zip(&self.utterances).any(|(a, u)| **a != u.id)
        {
            return fail("turns do not partition the utterance sequence".into());
        }
        for t in &self.turns {
            if t.utterances.is_empty() {
                return fail(format!("turn {} is empty", t.id));
            }
            for uid in &t.utterances {
                let u = self.utterance(uid.as_str()).expect("checked above");
                if u.speaker != t.speaker {
                    return fail(format!("turn {} mixes speakers", t.id));
                }
            }
        }

        let positions = self.episode_positions();
        if positions.len() != self.episodes.len() {
            return fail("episode ids are not unique".into());
        }
        let Some(&root_pos) = positions.get(self.episode_root.as_str()) else {
            return fail(format!("root episode {} missing", self.episode_root));
        };
        let root = &self.episodes[root_pos];
        if root.label.category != Category::Meeting || root.parent.is_some() {
            return fail("root episode must be an unparented MEETING".into());
        }
        let mut visited = vec![false; self.episodes.len()];
        let mut stack = vec![root_pos];
        while let Some(i) = stack.pop() {
            if visited[i] {
                return fail(format!("episode {} reached twice", self.episodes[i].id));
            }
            visited[i] = true;
            let ep = &self.episodes[i];
            if let Some(span) = ep.turn_span {
                if span.last >= self.turns.len() {
                    return fail(format!("episode {} spans past the last turn", ep.id));
                }
            }
            for child in &ep.children {
                let Some(&c) = positions.get(child.as_str()) else {
                    return fail(format!("episode {} has unknown child {child}", ep.id));
                };
                if self.episodes[c].parent.as_ref() != Some(&ep.id) {
                    return fail(format!("episode {child} does not point back to {}", ep.id));
                }
                stack.push(c);
            }
        }
        if let Some(i) = visited.iter().position(|v| !v) {
            return fail(format!("episode {} is detached from the tree", self.episodes[i].id));
        }

        let mut sources = HashSet::new();
        for edge in &self.reply_to {
            if !sources.insert(edge.from.as_str()) {
                return fail(format!("episode {} has two reply-to edges", edge.from));
            }
            if !positions.contains_key(edge.from.as_str()) {
                return fail(format!("reply-to from unknown episode {}", edge.from));
            }
            if edge.to.is_empty() {
                return fail(format!("reply-to edge of {} has no targets", edge.from));
            }
            for t in &edge.to {
                if !positions.contains_key(t.as_str()) {
                    return fail(format!("reply-to target {t} is unknown"));
                }
            }
        }
        Ok(())
    }
}
