//! The four segment indexes (stems, argumentative labels, latent labels,
//! document links) and the searches over them.

mod build;
mod entities;
mod search;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assist::LatentLabel;
use crate::graph::ArgGraph;
use crate::ids::{DocumentId, EpisodeId, MeetingId, ParticipantId};
use crate::mds::{ArgLabel, Category, PatternError};

pub use build::{build_indexes, link_documents, DocLink, IndexConfig};
pub use entities::{search_entities, Entity, EntityConstraint, EntityKind};
pub use search::{search_events, search_meetings, search_passages, search_stems, EventQuery, RankedHit, SearchResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndexError {
    #[error("unknown meeting {0}")]
    UnknownMeeting(MeetingId),
    #[error("unknown entity kind {0:?}")]
    UnknownKind(String),
    #[error("unknown granularity {0:?}")]
    UnknownGranularity(String),
    #[error("bad label pattern at byte {}: {}", .0.position, .0.message)]
    Pattern(PatternError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Meeting,
    Episode,
    Turn,
    Utterance,
}

impl Granularity {
    pub const ALL: [Granularity; 4] =
        [Granularity::Meeting, Granularity::Episode, Granularity::Turn, Granularity::Utterance];

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Meeting => "meeting",
            Granularity::Episode => "episode",
            Granularity::Turn => "turn",
            Granularity::Utterance => "utterance",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = IndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| IndexError::UnknownGranularity(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentRef {
    pub meeting: MeetingId,
    pub granularity: Granularity,
    pub id: String,
}

impl SegmentRef {
    pub fn new(meeting: &MeetingId, granularity: Granularity, id: impl Into<String>) -> Self {
        SegmentRef { meeting: meeting.clone(), granularity, id: id.into() }
    }
}

impl fmt::Display for SegmentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.meeting, self.granularity, self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub segment: SegmentRef,
    pub start: f64,
    pub end: f64,
    /// Number of stems in the segment.
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posting {
    /// Position in [`IndexSet::segments`].
    pub segment: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StemEntry {
    pub postings: Vec<Posting>,
    /// Document frequency per granularity.
    pub df: [u32; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgPosting {
    pub segment: SegmentRef,
    pub label: ArgLabel,
    pub speaker: Option<ParticipantId>,
    pub target: Option<String>,
    pub start: f64,
    pub end: f64,
    pub reply_to: Vec<EpisodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingEntry {
    pub id: MeetingId,
    pub title: String,
    pub date: Option<String>,
    pub participants: Vec<(ParticipantId, String)>,
    pub documents: Vec<(DocumentId, String)>,
}

/// Immutable index snapshot over a corpus.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IndexSet {
    pub meetings: Vec<MeetingEntry>,
    /// Every indexed segment, ordered by (meeting, start, granularity).
    pub segments: Vec<Segment>,
    /// Segment count per granularity.
    pub segment_counts: [u32; 4],
    pub stems: BTreeMap<String, StemEntry>,
    /// Euclidean norm of each segment's TF-IDF vector, parallel to `segments`.
    pub norms: Vec<f64>,
    /// Labeled episodes by category, temporally ordered within a meeting.
    pub args: BTreeMap<Category, Vec<ArgPosting>>,
    /// Utterances by latent label.
    pub latent: BTreeMap<LatentLabel, Vec<SegmentRef>>,
    pub doc_links: Vec<DocLink>,
    pub graphs: Vec<ArgGraph>,
}

impl IndexSet {
    pub fn is_empty(&self) -> bool {
        self.meetings.is_empty()
    }

    pub fn meeting(&self, id: &str) -> Option<&MeetingEntry> {
        self.meetings.iter().find(|m| m.id == id)
    }

    pub fn graph(&self, id: &str) -> Option<&ArgGraph> {
        self.graphs.iter().find(|g| g.meeting == id)
    }

    /// Postings of an exact stem.
    pub fn postings(&self, stem: &str) -> Vec<(&SegmentRef, u32)> {
        self.stems.get(stem).map_or_else(Vec::new, |e| {
            e.postings
                .iter()
                .map(|p| (&self.segments[p.segment as usize].segment, p.tf))
                .collect()
        })
    }

    /// Smoothed inverse document frequency: ln(1 + N / df), 0 for unseen stems.
    pub fn idf(&self, stem: &str, granularity: Granularity) -> f64 {
        let df = self.stems.get(stem).map_or(0, |e| e.df[granularity.slot()]);
        if df == 0 {
            return 0.0;
        }
        let n = f64::from(self.segment_counts[granularity.slot()]);
        (1.0 + n / f64::from(df)).ln()
    }

    pub fn segment_start(&self, seg: &SegmentRef) -> Option<f64> {
        self.segments.iter().find(|s| s.segment == *seg).map(|s| s.start)
    }

    /// Documents linked to a segment, best first.
    pub fn documents_for(&self, seg: &SegmentRef) -> Vec<&DocLink> {
        let mut out: Vec<&DocLink> = self.doc_links.iter().filter(|l| l.segment == *seg).collect();
        out.sort_by(|a, b| b.score.total_cmp(&a.score));
        out
    }

    /// Segments linked to a document, best first.
    pub fn segments_for(&self, meeting: &str, document: &str) -> Vec<&DocLink> {
        let mut out: Vec<&DocLink> = self
            .doc_links
            .iter()
            .filter(|l| l.segment.meeting == meeting && l.document == document)
            .collect();
        out.sort_by(|a, b| b.score.total_cmp(&a.score));
        out
    }
}
