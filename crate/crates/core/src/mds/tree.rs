use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dialogue::{Meeting, TurnSpan};
use crate::ids::{EpisodeId, ParticipantId};

use super::grammar::GrammarRuleSet;
use super::label::ArgLabel;
use super::validate::ViolationCode;

/// A labeled, time-bounded argumentation context. Episodes nest: every
/// episode except the meeting root has exactly one parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub id: EpisodeId,
    pub label: ArgLabel,
    pub start: f64,
    pub end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_span: Option<TurnSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<EpisodeId>,
    #[serde(default)]
    pub children: Vec<EpisodeId>,
    /// Actor of the act; defaults to the speaker of the first turn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attributed_speaker: Option<ParticipantId>,
    /// Issue, alternative or decision entity the act concerns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

impl Episode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Links an episode to one or more earlier episodes it responds to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyToEdge {
    pub from: EpisodeId,
    pub to: Vec<EpisodeId>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EditError {
    #[error("unknown episode {0}")]
    UnknownEpisode(EpisodeId),
    #[error("episode id {0} already in use")]
    DuplicateId(EpisodeId),
    #[error("turn span {0} is outside the meeting")]
    SpanOutOfRange(TurnSpan),
    #[error("{code}: {message}")]
    Violation { code: ViolationCode, episode: EpisodeId, message: String },
    #[error("{0} overlaps a sibling under an exclusive parent")]
    ExclusiveOverlap(EpisodeId),
    #[error("reply-to edge needs at least one target")]
    NoTargets,
}

/// What to insert: the episode's label and turns, plus optional overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<EpisodeId>,
    pub label: ArgLabel,
    pub turn_span: TurnSpan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker: Option<ParticipantId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

impl EpisodeSpec {
    pub fn new(label: ArgLabel, turn_span: TurnSpan) -> Self {
        Self { id: None, label, turn_span, speaker: None, target: None }
    }

    pub fn id(mut self, id: &str) -> Self {
        self.id = Some(EpisodeId::new(id));
        self
    }

    pub fn speaker(mut self, speaker: &str) -> Self {
        self.speaker = Some(ParticipantId::new(speaker));
        self
    }

    pub fn target(mut self, target: &str) -> Self {
        self.target = Some(target.to_owned());
        self
    }
}

impl Meeting {
    fn next_episode_id(&self) -> EpisodeId {
        let n = self
            .episodes
            .iter()
            .filter_map(|e| e.id.as_str().strip_prefix('e')?.parse::<usize>().ok())
            .max()
            .map_or(1, |n| n + 1);
        EpisodeId::new(format!("e{n}"))
    }

    /// Adds a sub-episode under `parent`, keeping siblings in temporal order.
    pub fn insert_episode(
        &self,
        parent: &str,
        spec: EpisodeSpec,
        grammar: &GrammarRuleSet,
    ) -> Result<(Meeting, EpisodeId), EditError> {
        let mut out = self.clone();
        let id = out.insert_in_place(parent, spec, grammar)?;
        out.normalize_episode_order();
        Ok((out, id))
    }

    /// Refines an episode into sub-episodes (top-down annotation). The
    /// children need not cover the whole span.
    pub fn refine_episode(
        &self,
        episode: &str,
        sublabels: Vec<(ArgLabel, TurnSpan)>,
        grammar: &GrammarRuleSet,
    ) -> Result<(Meeting, Vec<EpisodeId>), EditError> {
        let mut out = self.clone();
        let mut ids = Vec::with_capacity(sublabels.len());
        for (label, span) in sublabels {
            ids.push(out.insert_in_place(episode, EpisodeSpec::new(label, span), grammar)?);
        }
        out.normalize_episode_order();
        Ok((out, ids))
    }

    fn insert_in_place(
        &mut self,
        parent: &str,
        spec: EpisodeSpec,
        grammar: &GrammarRuleSet,
    ) -> Result<EpisodeId, EditError> {
        let positions = self.episode_positions();
        let parent_pos = *positions
            .get(parent)
            .ok_or_else(|| EditError::UnknownEpisode(EpisodeId::new(parent)))?;
        let id = spec.id.clone().unwrap_or_else(|| self.next_episode_id());
        if positions.contains_key(id.as_str()) {
            return Err(EditError::DuplicateId(id));
        }
        drop(positions);
        let span = spec.turn_span;
        if span.last >= self.turns.len() || span.first > span.last {
            return Err(EditError::SpanOutOfRange(span));
        }
        let (start, end) = self.span_interval(span);
        let parent_ep = &self.episodes[parent_pos];
        let inside_span = parent_ep.turn_span.is_none_or(|p| p.contains(&span));
        if !inside_span || start < parent_ep.start || end > parent_ep.end {
            return Err(EditError::Violation {
                code: ViolationCode::TemporalContainment,
                episode: id,
                message: format!("span {span} is not inside {}", parent_ep.id),
            });
        }
        if grammar.is_exclusive(&parent_ep.label) {
            for sibling in &parent_ep.children {
                let sib = self.episode(sibling.as_str()).expect("child exists");
                if sib.turn_span.is_some_and(|s| s.overlaps(&span)) {
                    return Err(EditError::ExclusiveOverlap(id));
                }
            }
        }
        let speaker = spec
            .speaker
            .unwrap_or_else(|| self.turns[span.first].speaker.clone());
        let episode = Episode {
            id: id.clone(),
            label: spec.label,
            start,
            end,
            turn_span: Some(span),
            parent: Some(parent_ep.id.clone()),
            children: Vec::new(),
            attributed_speaker: Some(speaker),
            target: spec.target,
        };
        let slot = parent_ep
            .children
            .iter()
            .position(|c| self.episode(c.as_str()).is_some_and(|e| e.start > start))
            .unwrap_or(parent_ep.children.len());
        self.episodes[parent_pos].children.insert(slot, id.clone());
        self.episodes.push(episode);
        Ok(id)
    }

    /// Records that `from` replies to each of `to`. Targets must start
    /// strictly earlier; repeated edges from one source are merged.
    pub fn add_reply_to(&self, from: &str, to: &[EpisodeId]) -> Result<Meeting, EditError> {
        if to.is_empty() {
            return Err(EditError::NoTargets);
        }
        let source = self
            .episode(from)
            .ok_or_else(|| EditError::UnknownEpisode(EpisodeId::new(from)))?;
        for t in to {
            let target = self
                .episode(t.as_str())
                .ok_or_else(|| EditError::UnknownEpisode(t.clone()))?;
            if target.start >= source.start {
                return Err(EditError::Violation {
                    code: ViolationCode::ReplyNotEarlier,
                    episode: source.id.clone(),
                    message: format!("{} does not start before {}", target.id, source.id),
                });
            }
        }
        let mut out = self.clone();
        match out.reply_to.iter_mut().find(|e| e.from == *from) {
            Some(edge) => {
                for t in to {
                    if !edge.to.contains(t) {
                        edge.to.push(t.clone());
                    }
                }
            }
            None => {
                let mut targets: Vec<EpisodeId> = Vec::new();
                for t in to {
                    if !targets.contains(t) {
                        targets.push(t.clone());
                    }
                }
                out.reply_to.push(ReplyToEdge { from: source.id.clone(), to: targets });
            }
        }
        Ok(out)
    }

    /// Non-root ancestors of an episode, nearest first.
    pub fn ancestors(&self, episode: &str) -> Vec<&Episode> {
        let mut out = Vec::new();
        let mut cur = self.episode(episode).and_then(|e| e.parent.as_ref());
        while let Some(id) = cur {
            let Some(ep) = self.episode(id.as_str()) else { break };
            if ep.id == self.episode_root {
                break;
            }
            out.push(ep);
            cur = ep.parent.as_ref();
        }
        out
    }

    /// Local context of an episode: everything it transitively replies to,
    /// together with the enclosing (non-root) episodes of itself and of those
    /// antecedents, ordered by start time.
    pub fn context_chain(&self, episode: &str) -> Result<Vec<EpisodeId>, EditError> {
        let me = self
            .episode(episode)
            .ok_or_else(|| EditError::UnknownEpisode(EpisodeId::new(episode)))?;
        let mut members: HashSet<&str> = HashSet::new();
        let mut frontier = vec![me.id.as_str()];
        while let Some(cur) = frontier.pop() {
            let mut next: Vec<&str> = self.replies_of(cur).iter().map(EpisodeId::as_str).collect();
            next.extend(self.ancestors(cur).into_iter().map(|e| e.id.as_str()));
            for n in next {
                if n != me.id.as_str() && members.insert(n) {
                    frontier.push(n);
                }
            }
        }
        let mut chain: Vec<(usize, &Episode)> = self
            .episodes
            .iter()
            .enumerate()
            .filter(|(_, e)| members.contains(e.id.as_str()))
            .collect();
        chain.sort_by(|(ia, a), (ib, b)| a.start.total_cmp(&b.start).then(ia.cmp(ib)));
        Ok(chain.into_iter().map(|(_, e)| e.id.clone()).collect())
    }
}
