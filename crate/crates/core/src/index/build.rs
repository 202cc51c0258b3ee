use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assist::{classify_latent, CueTable, LatentLabel};
use crate::dialogue::{Document, Meeting, TurnSpan};
use crate::graph::ArgGraph;
use crate::ids::DocumentId;
use crate::par::Execution;
use crate::text::{cosine, Analyzer};

use super::{
    ArgPosting, Granularity, IndexSet, MeetingEntry, Posting, Segment, SegmentRef, StemEntry,
};

#[derive(Debug, Clone, PartialEq)]
pub struct IndexConfig {
    pub analyzer: Analyzer,
    pub cues: CueTable,
    /// Minimum cosine for a document link.
    pub doc_threshold: f64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig { analyzer: Analyzer::default(), cues: CueTable::default(), doc_threshold: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocLink {
    pub document: DocumentId,
    pub segment: SegmentRef,
    pub score: f64,
}

type Keyed = (f64, Granularity, usize, Segment, BTreeMap<String, u32>);

struct Partial {
    entry: MeetingEntry,
    segments: Vec<(Segment, BTreeMap<String, u32>)>,
    args: Vec<ArgPosting>,
    latent: Vec<(LatentLabel, SegmentRef)>,
    links: Vec<DocLink>,
    graph: ArgGraph,
}

fn index_meeting(m: &Meeting, config: &IndexConfig) -> Partial {
    let analyzer = &config.analyzer;
    // (start, granularity, position) orders segments inside the meeting
    let mut segs: Vec<Keyed> = Vec::new();
    let mut push = |g: Granularity, pos: usize, id: String, start: f64, end: f64, text: &str| {
        let counts = analyzer.term_counts(text);
        let length = counts.values().sum();
        let segment = Segment { segment: SegmentRef::new(&m.id, g, id), start, end, length };
        segs.push((start, g, pos, segment, counts));
    };
    if !m.turns.is_empty() {
        let all = TurnSpan::new(0, m.turns.len() - 1);
        let (s, e) = m.span_interval(all);
        push(Granularity::Meeting, 0, m.id.to_string(), s, e, &m.span_text(all));
    }
    for (i, ep) in m.episodes.iter().enumerate() {
        if let Some(span) = ep.turn_span {
            push(Granularity::Episode, i, ep.id.to_string(), ep.start, ep.end, &m.span_text(span));
        }
    }
    for (i, t) in m.turns.iter().enumerate() {
        let (s, e) = m.span_interval(TurnSpan::single(i));
        push(Granularity::Turn, i, t.id.to_string(), s, e, &m.span_text(TurnSpan::single(i)));
    }
    let mut latent = Vec::new();
    for (i, u) in m.utterances.iter().enumerate() {
        push(Granularity::Utterance, i, u.id.to_string(), u.start, u.end, &u.text);
        latent.push((classify_latent(u, &config.cues), SegmentRef::new(&m.id, Granularity::Utterance, u.id.as_str())));
    }
    segs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut args: Vec<(usize, ArgPosting)> = m
        .episodes
        .iter()
        .enumerate()
        .map(|(i, ep)| {
            (
                i,
                ArgPosting {
                    segment: SegmentRef::new(&m.id, Granularity::Episode, ep.id.as_str()),
                    label: ep.label.clone(),
                    speaker: ep.attributed_speaker.clone(),
                    target: ep.target.clone(),
                    start: ep.start,
                    end: ep.end,
                    reply_to: m.replies_of(ep.id.as_str()).to_vec(),
                },
            )
        })
        .collect();
    args.sort_by(|a, b| a.1.start.total_cmp(&b.1.start).then(a.0.cmp(&b.0)));

    Partial {
        entry: MeetingEntry {
            id: m.id.clone(),
            title: m.title.clone(),
            date: m.date.clone(),
            participants: m.participants.iter().map(|p| (p.id.clone(), p.name.clone())).collect(),
            documents: m.documents.iter().map(|d| (d.id.clone(), d.title.clone())).collect(),
        },
        segments: segs.into_iter().map(|(_, _, _, s, c)| (s, c)).collect(),
        args: args.into_iter().map(|(_, a)| a).collect(),
        latent,
        links: link_documents(m, &m.documents, analyzer, config.doc_threshold),
        graph: ArgGraph::build(m),
    }
}

/// Scores every non-root episode against every document by cosine over
/// stem counts and keeps links at or above `threshold`.
pub fn link_documents(
    meeting: &Meeting,
    documents: &[Document],
    analyzer: &Analyzer,
    threshold: f64,
) -> Vec<DocLink> {
    let episodes: Vec<(SegmentRef, BTreeMap<String, u32>)> = meeting
        .episodes
        .iter()
        .filter(|e| e.parent.is_some())
        .filter_map(|e| {
            let span = e.turn_span?;
            let seg = SegmentRef::new(&meeting.id, Granularity::Episode, e.id.as_str());
            Some((seg, analyzer.term_counts(&meeting.span_text(span))))
        })
        .collect();
    let mut out = Vec::new();
    for doc in documents {
        let doc_counts = analyzer.term_counts(&format!("{} {}", doc.title, doc.text));
        for (seg, counts) in &episodes {
            let score = cosine(counts, &doc_counts);
            if score > 0.0 && score >= threshold {
                out.push(DocLink { document: doc.id.clone(), segment: seg.clone(), score });
            }
        }
    }
    out
}

pub fn build_indexes(corpus: &[Meeting], config: &IndexConfig, execution: Execution) -> IndexSet {
    let mut sorted: Vec<&Meeting> = corpus.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let partials = execution.map(&sorted, |m| index_meeting(m, config));

    let mut index = IndexSet::default();
    for p in partials {
        index.meetings.push(p.entry);
        for (segment, counts) in p.segments {
            let pos = index.segments.len() as u32;
            let g = segment.segment.granularity.slot();
            index.segment_counts[g] += 1;
            for (stem, tf) in counts {
                let entry = index
                    .stems
                    .entry(stem)
                    .or_insert_with(|| StemEntry { postings: Vec::new(), df: [0; 4] });
                entry.postings.push(Posting { segment: pos, tf });
                entry.df[g] += 1;
            }
            index.segments.push(segment);
        }
        for a in p.args {
            index.args.entry(a.label.category).or_default().push(a);
        }
        for (label, seg) in p.latent {
            index.latent.entry(label).or_default().push(seg);
        }
        index.doc_links.extend(p.links);
        index.graphs.push(p.graph);
    }

    let mut sq = vec![0.0f64; index.segments.len()];
    for (stem, entry) in &index.stems {
        for p in &entry.postings {
            let g = index.segments[p.segment as usize].segment.granularity;
            let w = f64::from(p.tf) * index.idf(stem, g);
            sq[p.segment as usize] += w * w;
        }
    }
    index.norms = sq.into_iter().map(f64::sqrt).collect();
    index
}
