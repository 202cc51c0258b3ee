use serde::{Deserialize, Serialize};

use crate::dialogue::{Meeting, TurnSpan};
use crate::ids::{EpisodeId, MeetingId, ParticipantId};
use crate::mds::{validate, ArgLabel, Category, EditError, EpisodeSpec, GrammarRuleSet};
use crate::par::Execution;
use crate::text::Analyzer;

use super::{detect_adjacency_pairs, propose_issue_boundaries, AdjacencyPair, PairKind, PairPatterns};

/// Minimum pair density for a cluster to become a suggestion: at least
/// `pairs` propose-accept/reject pairs and at least `pairs` per
/// `per_turns` turns of the cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityThreshold {
    pub pairs: usize,
    pub per_turns: usize,
}

impl Default for DensityThreshold {
    fn default() -> Self {
        DensityThreshold { pairs: 2, per_turns: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestConfig {
    pub patterns: PairPatterns,
    pub density: DensityThreshold,
    /// Cohesion window in turns, also the snapping distance to a boundary.
    pub window: usize,
    pub boundary_threshold: f64,
}

impl Default for SuggestConfig {
    fn default() -> Self {
        SuggestConfig {
            patterns: PairPatterns::default(),
            density: DensityThreshold::default(),
            window: 3,
            boundary_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSuggestion {
    pub label: ArgLabel,
    pub turn_span: TurnSpan,
    pub speaker: ParticipantId,
    /// Indices of earlier siblings this episode replies to.
    pub reply_to: Vec<usize>,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub meeting: MeetingId,
    pub parent: EpisodeId,
    pub label: ArgLabel,
    pub turn_span: TurnSpan,
    /// Existing episodes the suggested episode would reply to.
    pub reply_to: Vec<EpisodeId>,
    pub confidence: f64,
    /// Ids of the adjacency pairs and boundaries behind the suggestion.
    pub evidence: Vec<String>,
    pub children: Vec<SubSuggestion>,
}

struct Cluster<'a> {
    first: usize,
    last: usize,
    pairs: Vec<&'a AdjacencyPair>,
}

/// Proposes DISCUSSION episodes over dense runs of proposal/response pairs.
/// Every suggestion has been applied to a copy of the meeting and does not
/// add validator violations.
pub fn suggest_annotations(
    meeting: &Meeting,
    grammar: &GrammarRuleSet,
    config: &SuggestConfig,
    analyzer: &Analyzer,
) -> Vec<Suggestion> {
    let pairs: Vec<AdjacencyPair> = detect_adjacency_pairs(meeting, &config.patterns)
        .into_iter()
        .filter(|p| matches!(p.kind, PairKind::ProposeAccept | PairKind::ProposeReject))
        .collect();
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut sorted: Vec<&AdjacencyPair> = pairs.iter().collect();
    sorted.sort_by_key(|p| (p.first_turn, p.second_turn));
    for p in sorted {
        match clusters.last_mut() {
            Some(c) if p.first_turn <= c.last => {
                c.last = c.last.max(p.second_turn);
                c.pairs.push(p);
            }
            _ => clusters.push(Cluster { first: p.first_turn, last: p.second_turn, pairs: vec![p] }),
        }
    }

    let boundaries = propose_issue_boundaries(meeting, config.window.max(1), config.boundary_threshold, analyzer)
        .map(|b| b.candidates)
        .unwrap_or_default();
    let baseline = validate(meeting, grammar).violations.len();
    let d = config.density;

    let mut out = Vec::new();
    for c in clusters {
        let len = c.last - c.first + 1;
        let count = c.pairs.len();
        if d.per_turns == 0 || count < d.pairs || count * d.per_turns < d.pairs * len {
            continue;
        }
        let mut evidence: Vec<String> = c.pairs.iter().map(|p| p.id()).collect();
        let mut first = c.first;
        let mut last = c.last;
        if let Some(b) = boundaries
            .iter()
            .rfind(|b| b.after_turn < c.first && c.first - (b.after_turn + 1) <= config.window)
        {
            first = b.after_turn + 1;
            evidence.push(format!("boundary:{}", b.first_utterance));
        }
        if let Some(b) = boundaries
            .iter()
            .find(|b| b.after_turn >= c.last && b.after_turn - c.last <= config.window)
        {
            last = b.after_turn;
            evidence.push(format!("boundary:{}", b.first_utterance));
        }
        let span = TurnSpan::new(first, last);
        let discussion = ArgLabel::new(Category::Discussion);
        let Some(parent) = deepest_licensing_parent(meeting, grammar, span, &discussion) else {
            continue;
        };

        let children = sub_suggestions(meeting, &c.pairs);
        let mean = c.pairs.iter().map(|p| p.confidence).sum::<f64>() / count as f64;
        let density_ratio = (count * d.per_turns) as f64 / (d.pairs * len).max(1) as f64;
        let suggestion = Suggestion {
            meeting: meeting.id.clone(),
            parent,
            label: discussion,
            turn_span: span,
            reply_to: Vec::new(),
            confidence: mean * density_ratio.min(1.0),
            evidence,
            children,
        };
        match apply_suggestion(meeting, &suggestion, grammar) {
            Ok(applied) if validate(&applied, grammar).violations.len() <= baseline => {
                out.push(suggestion)
            }
            _ => {}
        }
    }
    out.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.turn_span.first.cmp(&b.turn_span.first))
    });
    out
}

fn deepest_licensing_parent(
    meeting: &Meeting,
    grammar: &GrammarRuleSet,
    span: TurnSpan,
    label: &ArgLabel,
) -> Option<EpisodeId> {
    let (start, end) = meeting.span_interval(span);
    let mut best: Option<(usize, &EpisodeId)> = None;
    for e in &meeting.episodes {
        let Some(es) = e.turn_span else { continue };
        if !es.contains(&span) || start < e.start || end > e.end {
            continue;
        }
        if !grammar.licenses_child(&e.label, label) {
            continue;
        }
        let depth = meeting.ancestors(e.id.as_str()).len() + usize::from(e.parent.is_some());
        if best.is_none_or(|(d, _)| depth > d) {
            best = Some((depth, &e.id));
        }
    }
    best.map(|(_, id)| id.clone())
}

fn sub_suggestions(meeting: &Meeting, pairs: &[&AdjacencyPair]) -> Vec<SubSuggestion> {
    let alternative = |c| ArgLabel::with_param(c, "alternative");
    // (turn, order within turn, label, confidence, first-part turn)
    let mut items: Vec<(usize, u8, ArgLabel, f64, Option<usize>)> = Vec::new();
    for p in pairs {
        if !items.iter().any(|i| i.0 == p.first_turn && i.4.is_none()) {
            items.push((p.first_turn, 1, alternative(Category::Propose), p.confidence, None));
        } else if let Some(i) = items.iter_mut().find(|i| i.0 == p.first_turn && i.4.is_none()) {
            i.3 = i.3.max(p.confidence);
        }
        let (cat, order) = match p.kind {
            PairKind::ProposeReject => (Category::Reject, 0),
            _ => (Category::Accept, 2),
        };
        let dup = items
            .iter()
            .any(|i| i.0 == p.second_turn && i.2.category == cat && i.4 == Some(p.first_turn));
        if !dup {
            items.push((p.second_turn, order, alternative(cat), p.confidence, Some(p.first_turn)));
        }
    }
    items.sort_by_key(|a| (a.0, a.1));
    items
        .iter()
        .map(|(turn, _, label, confidence, target)| {
            let reply_to = target
                .and_then(|t| items.iter().position(|i| i.0 == t && i.4.is_none()))
                .into_iter()
                .collect();
            SubSuggestion {
                label: label.clone(),
                turn_span: TurnSpan::single(*turn),
                speaker: meeting.turns[*turn].speaker.clone(),
                reply_to,
                confidence: *confidence,
            }
        })
        .collect()
}

/// Inserts a suggestion (and its sub-episodes and reply-to edges).
pub fn apply_suggestion(
    meeting: &Meeting,
    suggestion: &Suggestion,
    grammar: &GrammarRuleSet,
) -> Result<Meeting, EditError> {
    let spec = EpisodeSpec::new(suggestion.label.clone(), suggestion.turn_span);
    let (mut m, top) = meeting.insert_episode(suggestion.parent.as_str(), spec, grammar)?;
    if !suggestion.reply_to.is_empty() {
        m = m.add_reply_to(top.as_str(), &suggestion.reply_to)?;
    }
    let mut ids: Vec<EpisodeId> = Vec::with_capacity(suggestion.children.len());
    for child in &suggestion.children {
        let spec = EpisodeSpec {
            speaker: Some(child.speaker.clone()),
            ..EpisodeSpec::new(child.label.clone(), child.turn_span)
        };
        let (next, id) = m.insert_episode(top.as_str(), spec, grammar)?;
        m = next;
        ids.push(id);
    }
    for (i, child) in suggestion.children.iter().enumerate() {
        let targets: Vec<EpisodeId> = child
            .reply_to
            .iter()
            .filter_map(|&j| ids.get(j).cloned())
            .collect();
        if !targets.is_empty() {
            m = m.add_reply_to(ids[i].as_str(), &targets)?;
        }
    }
    Ok(m)
}

/// Suggestions for a whole corpus, one list per meeting.
pub fn suggest_corpus(
    meetings: &[Meeting],
    grammar: &GrammarRuleSet,
    config: &SuggestConfig,
    analyzer: &Analyzer,
    execution: Execution,
) -> Vec<Vec<Suggestion>> {
    execution.map(meetings, |m| suggest_annotations(m, grammar, config, analyzer))
}
