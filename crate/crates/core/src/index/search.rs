use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::ids::ParticipantId;
use crate::mds::LabelPattern;
use crate::stem::porter_stem;
use crate::text::Analyzer;

use super::{ArgPosting, Granularity, IndexError, IndexSet, SegmentRef};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedHit {
    pub segment: SegmentRef,
    pub score: f64,
    pub start: f64,
    /// Query stems found in the segment.
    pub matched: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchResult {
    pub hits: Vec<RankedHit>,
    /// Query terms that contributed nothing (stopwords or unseen stems).
    pub unmatched: Vec<String>,
}

/// Cosine between the query's and each segment's TF-IDF vectors, IDF taken
/// over segments of the requested granularity.
pub fn search_stems(
    index: &IndexSet,
    meeting: Option<&str>,
    stems: &[String],
    granularity: Granularity,
) -> Result<SearchResult, IndexError> {
    if let Some(m) = meeting {
        if index.meeting(m).is_none() {
            return Err(IndexError::UnknownMeeting(m.into()));
        }
    }
    let mut qtf: Vec<(&str, u32)> = Vec::new();
    let mut unmatched = Vec::new();
    for s in stems {
        if index.idf(s, granularity) == 0.0 {
            if !unmatched.contains(s) {
                unmatched.push(s.clone());
            }
            continue;
        }
        match qtf.iter_mut().find(|(t, _)| *t == s.as_str()) {
            Some((_, n)) => *n += 1,
            None => qtf.push((s.as_str(), 1)),
        }
    }
    let qnorm = qtf
        .iter()
        .map(|(t, n)| (f64::from(*n) * index.idf(t, granularity)).powi(2))
        .sum::<f64>()
        .sqrt();

    let mut acc: HashMap<u32, (f64, Vec<String>)> = HashMap::new();
    for (t, n) in &qtf {
        let idf = index.idf(t, granularity);
        for p in &index.stems[*t].postings {
            let seg = &index.segments[p.segment as usize].segment;
            if seg.granularity != granularity || meeting.is_some_and(|m| seg.meeting != m) {
                continue;
            }
            let slot = acc.entry(p.segment).or_default();
            slot.0 += f64::from(*n) * idf * f64::from(p.tf) * idf;
            slot.1.push((*t).to_owned());
        }
    }
    let mut hits: Vec<RankedHit> = acc
        .into_iter()
        .filter_map(|(pos, (dot, mut matched))| {
            let denom = qnorm * index.norms[pos as usize];
            let score = if denom > 0.0 { dot / denom } else { 0.0 };
            if score <= 0.0 {
                return None;
            }
            matched.sort();
            let seg = &index.segments[pos as usize];
            Some(RankedHit { segment: seg.segment.clone(), score, start: seg.start, matched })
        })
        .collect();
    sort_hits(&mut hits);
    Ok(SearchResult { hits, unmatched })
}

pub(crate) fn sort_hits(hits: &mut [RankedHit]) {
    hits.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.start.total_cmp(&b.start))
            .then_with(|| a.segment.cmp(&b.segment))
    });
}

fn query_stems(terms: &str, analyzer: &Analyzer) -> (Vec<String>, Vec<String>) {
    let mut stems = Vec::new();
    let mut dropped = Vec::new();
    for w in terms.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()) {
        let w = w.to_lowercase();
        if analyzer.is_stopword(&w) {
            dropped.push(w);
        } else {
            stems.push(porter_stem(&w));
        }
    }
    (stems, dropped)
}

pub fn search_passages(
    index: &IndexSet,
    meeting: Option<&str>,
    terms: &str,
    granularity: Granularity,
    analyzer: &Analyzer,
) -> Result<SearchResult, IndexError> {
    let (stems, dropped) = query_stems(terms, analyzer);
    let mut result = search_stems(index, meeting, &stems, granularity)?;
    // report the words the user typed, not their stems
    let words: Vec<String> = terms
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect();
    let mut unmatched: Vec<String> = dropped;
    for w in words {
        if !analyzer.is_stopword(&w) && result.unmatched.contains(&porter_stem(&w)) && !unmatched.contains(&w) {
            unmatched.push(w);
        }
    }
    result.unmatched = unmatched;
    Ok(result)
}

pub fn search_meetings(index: &IndexSet, terms: &str, analyzer: &Analyzer) -> SearchResult {
    search_passages(index, None, terms, Granularity::Meeting, analyzer)
        .expect("unscoped search cannot name an unknown meeting")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventQuery {
    pub pattern: LabelPattern,
    #[serde(default)]
    pub speaker: Option<ParticipantId>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub meeting: Option<String>,
    /// Keep episodes starting inside `[from, to]` seconds.
    #[serde(default)]
    pub interval: Option<(f64, f64)>,
}

impl EventQuery {
    pub fn parse(pattern: &str) -> Result<Self, IndexError> {
        Ok(EventQuery {
            pattern: pattern.parse().map_err(IndexError::Pattern)?,
            speaker: None,
            target: None,
            meeting: None,
            interval: None,
        })
    }

    pub fn speaker(mut self, speaker: &str) -> Self {
        self.speaker = Some(ParticipantId::new(speaker));
        self
    }

    pub fn target(mut self, target: &str) -> Self {
        self.target = Some(target.to_owned());
        self
    }

    pub fn meeting(mut self, meeting: &str) -> Self {
        self.meeting = Some(meeting.to_owned());
        self
    }

    fn admits(&self, p: &ArgPosting) -> bool {
        self.pattern.matches(&p.label)
            && self.speaker.as_ref().is_none_or(|s| p.speaker.as_ref() == Some(s))
            && self.target.as_ref().is_none_or(|t| p.target.as_ref() == Some(t))
            && self.meeting.as_ref().is_none_or(|m| p.segment.meeting == m.as_str())
            && self.interval.is_none_or(|(a, b)| p.start >= a && p.start <= b)
    }
}

impl IndexSet {
    /// Labeled episodes matching an event query, by meeting then start time.
    pub fn events(&self, query: &EventQuery) -> Vec<&ArgPosting> {
        self.args
            .get(&query.pattern.category)
            .map_or_else(Vec::new, |list| list.iter().filter(|p| query.admits(p)).collect())
    }
}

pub fn search_events(index: &IndexSet, query: &EventQuery) -> Vec<SegmentRef> {
    index.events(query).into_iter().map(|p| p.segment.clone()).collect()
}
