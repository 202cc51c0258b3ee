use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dialogue::Meeting;
use crate::ids::{EpisodeId, MeetingId};
use crate::par::Execution;

use super::grammar::GrammarRuleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    TemporalContainment,
    ReplyNotEarlier,
    ReplyUnlicensed,
    ChildUnlicensed,
    EmptyEpisode,
    ParamUnknown,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::TemporalContainment => "TEMPORAL_CONTAINMENT",
            ViolationCode::ReplyNotEarlier => "REPLY_NOT_EARLIER",
            ViolationCode::ReplyUnlicensed => "REPLY_UNLICENSED",
            ViolationCode::ChildUnlicensed => "CHILD_UNLICENSED",
            ViolationCode::EmptyEpisode => "EMPTY_EPISODE",
            ViolationCode::ParamUnknown => "PARAM_UNKNOWN",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// Offending episode, or the source of the offending reply-to edge.
    pub episode: EpisodeId,
    /// Parent or reply-to target involved, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub related: Option<EpisodeId>,
    pub message: String,
    #[serde(skip)]
    start: f64,
}

impl Violation {
    /// A violation found outside [`validate`], e.g. by a refused edit.
    pub fn new(code: ViolationCode, episode: EpisodeId, related: Option<EpisodeId>, message: String) -> Self {
        Violation { code, episode, related, message, start: 0.0 }
    }

    /// `(code, episode, related)` triple, convenient for set comparisons.
    pub fn key(&self) -> (ViolationCode, String, Option<String>) {
        (
            self.code,
            self.episode.to_string(),
            self.related.as_ref().map(ToString::to_string),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub meeting: MeetingId,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, code: ViolationCode) -> usize {
        self.violations.iter().filter(|v| v.code == code).count()
    }
}

/// Checks every episode and reply-to edge of a meeting against the grammar.
/// Violations are ordered by (episode start, code).
pub fn validate(meeting: &Meeting, grammar: &GrammarRuleSet) -> ValidationReport {
    let mut violations = Vec::new();
    let positions = meeting.episode_positions();
    let mut push = |code, ep: &super::Episode, related: Option<&EpisodeId>, message: String| {
        violations.push(Violation {
            code,
            episode: ep.id.clone(),
            related: related.cloned(),
            message,
            start: ep.start,
        });
    };

    for ep in &meeting.episodes {
        if !grammar.knows_parameter(&ep.label) {
            push(
                ViolationCode::ParamUnknown,
                ep,
                None,
                format!("{} is not a declared parameter of {}", ep.label, ep.label.category),
            );
        }
        if ep.is_leaf() && ep.turn_span.is_none() {
            push(ViolationCode::EmptyEpisode, ep, None, format!("leaf {} covers no turns", ep.id));
        }
        let Some(parent_id) = &ep.parent else { continue };
        let Some(&pp) = positions.get(parent_id.as_str()) else { continue };
        let parent = &meeting.episodes[pp];
        if !grammar.licenses_child(&parent.label, &ep.label) {
            push(
                ViolationCode::ChildUnlicensed,
                ep,
                Some(parent_id),
                format!("{} may not occur under {}", ep.label, parent.label),
            );
        }
        let spans_nest = match (parent.turn_span, ep.turn_span) {
            (Some(p), Some(c)) => p.contains(&c),
            _ => true,
        };
        if !spans_nest || ep.start < parent.start || ep.end > parent.end {
            push(
                ViolationCode::TemporalContainment,
                ep,
                Some(parent_id),
                format!("{} is not contained in its parent {}", ep.id, parent.id),
            );
        }
    }

    for edge in &meeting.reply_to {
        let Some(&sp) = positions.get(edge.from.as_str()) else { continue };
        let source = &meeting.episodes[sp];
        for target_id in &edge.to {
            let Some(&tp) = positions.get(target_id.as_str()) else { continue };
            let target = &meeting.episodes[tp];
            if target.start >= source.start {
                push(
                    ViolationCode::ReplyNotEarlier,
                    source,
                    Some(target_id),
                    format!("{} replies to {} which does not start earlier", source.id, target.id),
                );
            }
            if !grammar.licenses_reply(&source.label, &target.label) {
                push(
                    ViolationCode::ReplyUnlicensed,
                    source,
                    Some(target_id),
                    format!("{} may not reply to {}", source.label, target.label),
                );
            }
        }
    }

    violations.sort_by(|a, b| {
        a.start
            .total_cmp(&b.start)
            .then(a.code.cmp(&b.code))
            .then_with(|| a.episode.cmp(&b.episode))
            .then_with(|| a.related.cmp(&b.related))
    });
    ValidationReport { meeting: meeting.id.clone(), violations }
}

/// Validates many meetings; reports come back in input order.
pub fn validate_corpus(
    meetings: &[Meeting],
    grammar: &GrammarRuleSet,
    exec: Execution,
) -> Vec<ValidationReport> {
    exec.map(meetings, |m| validate(m, grammar))
}
