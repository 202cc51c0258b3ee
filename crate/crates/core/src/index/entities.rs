use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::ArgGraph;
use crate::ids::{MeetingId, ParticipantId};
use crate::mds::{Category, LabelPattern};

use super::{Granularity, IndexError, IndexSet, SegmentRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Participant,
    Issue,
    Alternative,
    Document,
    Date,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Participant => "participant",
            EntityKind::Issue => "issue",
            EntityKind::Alternative => "alternative",
            EntityKind::Document => "document",
            EntityKind::Date => "date",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = IndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            EntityKind::Participant,
            EntityKind::Issue,
            EntityKind::Alternative,
            EntityKind::Document,
            EntityKind::Date,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| IndexError::UnknownKind(s.to_owned()))
    }
}

/// Filters for [`search_entities`]. A constraint that does not apply to the
/// requested kind matches nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityConstraint {
    InMeeting(MeetingId),
    /// Case-insensitive substring of the entity id or name.
    Named(String),
    /// Participants with at least `count` episodes matching `pattern`,
    /// optionally only those replying directly to episodes of `replying_to`.
    PerformedAtLeast { pattern: LabelPattern, count: usize, replying_to: Option<ParticipantId> },
    /// Participants whose REJECT chains reach every PROPOSE of the speaker.
    RejectedAllProposalsOf(ParticipantId),
    /// Issues with this id, or alternatives and participants acting in it.
    InIssue(String),
    /// Documents linked to this segment.
    LinkedTo(SegmentRef),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub kind: EntityKind,
    pub id: String,
    pub name: String,
    pub meeting: MeetingId,
    pub evidence: Vec<SegmentRef>,
}

fn episode_ref(g: &ArgGraph, i: usize) -> SegmentRef {
    SegmentRef::new(&g.meeting, Granularity::Episode, g.nodes[i].id.as_str())
}

fn meeting_ref(m: &MeetingId) -> SegmentRef {
    SegmentRef::new(m, Granularity::Meeting, m.as_str())
}

pub fn search_entities(
    index: &IndexSet,
    kind: EntityKind,
    constraints: &[EntityConstraint],
) -> Vec<Entity> {
    let mut out = Vec::new();
    for entry in &index.meetings {
        let in_scope = constraints.iter().all(|c| match c {
            EntityConstraint::InMeeting(m) => *m == entry.id,
            _ => true,
        });
        if !in_scope {
            continue;
        }
        let Some(g) = index.graph(entry.id.as_str()) else { continue };
        let mut candidates: Vec<Entity> = match kind {
            EntityKind::Participant => entry
                .participants
                .iter()
                .map(|(id, name)| {
                    let mut evidence: Vec<SegmentRef> = (0..g.nodes.len())
                        .filter(|&i| g.nodes[i].parent.is_some() && g.nodes[i].speaker.as_ref() == Some(id))
                        .map(|i| episode_ref(g, i))
                        .collect();
                    if evidence.is_empty() {
                        evidence.push(meeting_ref(&entry.id));
                    }
                    Entity {
                        kind,
                        id: id.to_string(),
                        name: name.clone(),
                        meeting: entry.id.clone(),
                        evidence,
                    }
                })
                .collect(),
            EntityKind::Issue => g
                .issues()
                .into_iter()
                .map(|(id, eps)| Entity {
                    kind,
                    name: id.clone(),
                    id,
                    meeting: entry.id.clone(),
                    evidence: eps.into_iter().map(|i| episode_ref(g, i)).collect(),
                })
                .collect(),
            EntityKind::Alternative => {
                let mut alts: Vec<(f64, Entity)> = g
                    .alternatives()
                    .into_iter()
                    .map(|(id, nodes)| {
                        let start = g.nodes[nodes[0]].start;
                        let e = Entity {
                            kind,
                            name: id.clone(),
                            id,
                            meeting: entry.id.clone(),
                            evidence: nodes.into_iter().map(|i| episode_ref(g, i)).collect(),
                        };
                        (start, e)
                    })
                    .collect();
                alts.sort_by(|a, b| a.0.total_cmp(&b.0));
                alts.into_iter().map(|(_, e)| e).collect()
            }
            EntityKind::Document => entry
                .documents
                .iter()
                .map(|(id, title)| {
                    let mut evidence: Vec<SegmentRef> = index
                        .segments_for(entry.id.as_str(), id.as_str())
                        .into_iter()
                        .map(|l| l.segment.clone())
                        .collect();
                    if evidence.is_empty() {
                        evidence.push(meeting_ref(&entry.id));
                    }
                    Entity {
                        kind,
                        id: id.to_string(),
                        name: title.clone(),
                        meeting: entry.id.clone(),
                        evidence,
                    }
                })
                .collect(),
            EntityKind::Date => entry
                .date
                .iter()
                .map(|d| Entity {
                    kind,
                    id: d.clone(),
                    name: d.clone(),
                    meeting: entry.id.clone(),
                    evidence: vec![meeting_ref(&entry.id)],
                })
                .collect(),
        };
        for c in constraints {
            candidates = candidates
                .into_iter()
                .filter_map(|e| apply_constraint(index, g, e, c))
                .collect();
        }
        out.extend(candidates);
    }
    out
}

fn apply_constraint(
    index: &IndexSet,
    g: &ArgGraph,
    mut e: Entity,
    c: &EntityConstraint,
) -> Option<Entity> {
    match c {
        EntityConstraint::InMeeting(_) => Some(e),
        EntityConstraint::Named(s) => {
            let s = s.to_lowercase();
            (e.id.to_lowercase().contains(&s) || e.name.to_lowercase().contains(&s)).then_some(e)
        }
        EntityConstraint::PerformedAtLeast { pattern, count, replying_to } => {
            if e.kind != EntityKind::Participant {
                return None;
            }
            let acts: Vec<usize> = (0..g.nodes.len())
                .filter(|&i| {
                    let n = &g.nodes[i];
                    pattern.matches(&n.label)
                        && n.speaker.as_ref().is_some_and(|s| *s == e.id.as_str())
                        && replying_to.as_ref().is_none_or(|x| {
                            n.replies.iter().any(|&t| g.nodes[t].speaker.as_ref() == Some(x))
                        })
                })
                .collect();
            if acts.len() < *count || acts.is_empty() {
                return None;
            }
            e.evidence = acts.into_iter().map(|i| episode_ref(g, i)).collect();
            Some(e)
        }
        EntityConstraint::RejectedAllProposalsOf(x) => {
            if e.kind != EntityKind::Participant {
                return None;
            }
            let (_, rejects) = g
                .rejecters_of(x.as_str(), 1.0)
                .into_iter()
                .find(|(p, _)| *p == e.id.as_str())?;
            e.evidence = rejects.into_iter().map(|i| episode_ref(g, i)).collect();
            Some(e)
        }
        EntityConstraint::InIssue(issue) => match e.kind {
            EntityKind::Issue => (e.id == *issue).then_some(e),
            EntityKind::Alternative => {
                let nodes = g.alternatives().remove(&e.id)?;
                nodes.iter().any(|&n| g.issue_of(n).as_deref() == Some(issue)).then_some(e)
            }
            EntityKind::Participant => {
                let acts: Vec<usize> = (0..g.nodes.len())
                    .filter(|&i| {
                        let n = &g.nodes[i];
                        n.speaker.as_ref().is_some_and(|s| *s == e.id.as_str())
                            && !matches!(n.label.category, Category::Meeting)
                            && g.issue_of(i).as_deref() == Some(issue)
                    })
                    .collect();
                if acts.is_empty() {
                    return None;
                }
                e.evidence = acts.into_iter().map(|i| episode_ref(g, i)).collect();
                Some(e)
            }
            _ => None,
        },
        EntityConstraint::LinkedTo(seg) => {
            if e.kind != EntityKind::Document {
                return None;
            }
            index
                .documents_for(seg)
                .iter()
                .any(|l| l.document == e.id.as_str() && l.segment.meeting == e.meeting)
                .then_some(e)
        }
    }
}
