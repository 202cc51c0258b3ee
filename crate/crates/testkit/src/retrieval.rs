//! Rarest-stem self-retrieval: every non-empty segment must come back when
//! searched for by its own rarest stem. Document frequencies are counted
//! here from the meetings, not read from the index.

use std::collections::BTreeMap;

use ibismeet_core::index::{search_stems, Granularity, IndexSet};
use ibismeet_core::mds::GrammarRuleSet;
use ibismeet_core::synth::{deliberation_meeting, random_transcript, SynthConfig};
use ibismeet_core::text::Analyzer;
use ibismeet_core::{Meeting, TurnSpan};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fixtures::m1;

/// M1 plus ten unannotated and ten annotated random meetings.
pub fn mixed_corpus(seed: u64) -> Vec<Meeting> {
    let g = GrammarRuleSet::default_mds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = vec![m1()];
    for i in 0..10 {
        corpus.push(random_transcript(&mut rng, &format!("T{i}"), &SynthConfig::default()));
        corpus.push(deliberation_meeting(&mut rng, &format!("D{i}"), &SynthConfig::default(), &g));
    }
    corpus
}

/// `(meeting, granularity, id, text)` of every segment, recomputed from the
/// meetings.
pub fn segment_texts(corpus: &[Meeting]) -> Vec<(String, Granularity, String, String)> {
    let mut out = Vec::new();
    for m in corpus {
        let all = TurnSpan::new(0, m.turns.len() - 1);
        out.push((m.id.to_string(), Granularity::Meeting, m.id.to_string(), m.span_text(all)));
        for e in &m.episodes {
            if let Some(span) = e.turn_span {
                out.push((m.id.to_string(), Granularity::Episode, e.id.to_string(), m.span_text(span)));
            }
        }
        for (i, t) in m.turns.iter().enumerate() {
            out.push((m.id.to_string(), Granularity::Turn, t.id.to_string(), m.span_text(TurnSpan::single(i))));
        }
        for u in &m.utterances {
            out.push((m.id.to_string(), Granularity::Utterance, u.id.to_string(), u.text.clone()));
        }
    }
    out
}

/// Number of non-empty segments checked, or the first one not retrieved
/// with a positive score.
pub fn self_retrieval(corpus: &[Meeting], index: &IndexSet, analyzer: &Analyzer) -> Result<usize, String> {
    let texts = segment_texts(corpus);
    let mut df: BTreeMap<(Granularity, String), usize> = BTreeMap::new();
    for (_, g, _, text) in &texts {
        for s in analyzer.term_counts(text).into_keys() {
            *df.entry((*g, s)).or_default() += 1;
        }
    }
    let mut checked = 0;
    for (meeting, g, id, text) in &texts {
        let counts = analyzer.term_counts(text);
        let Some(rarest) = counts.keys().min_by_key(|s| (df[&(*g, (*s).clone())], (*s).clone())) else { continue };
        let result = search_stems(index, None, std::slice::from_ref(rarest), *g).map_err(|e| e.to_string())?;
        let hit = result.hits.iter().find(|h| h.segment.meeting == meeting.as_str() && h.segment.id == *id);
        if !hit.is_some_and(|h| h.score > 0.0) {
            return Err(format!("{meeting}/{g}/{id} not found by {rarest}"));
        }
        checked += 1;
    }
    Ok(checked)
}
