//! Read-only view of a meeting's argumentation: episodes as nodes, reply-to
//! edges, and the issue/alternative structure derived from them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dialogue::Meeting;
use crate::ids::{EpisodeId, MeetingId, ParticipantId};
use crate::mds::{ArgLabel, Category};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgNode {
    pub id: EpisodeId,
    pub label: ArgLabel,
    pub speaker: Option<ParticipantId>,
    pub target: Option<String>,
    pub parent: Option<usize>,
    pub start: f64,
    pub end: f64,
    /// Direct reply-to targets.
    pub replies: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Pro,
    Con,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    /// JUSTIFY or PROVIDE episode stating the argument.
    pub episode: EpisodeId,
    pub speaker: Option<ParticipantId>,
    pub polarity: Polarity,
    /// Alternatives the argument bears on.
    pub alternatives: Vec<String>,
    /// Decision episodes the argument bears on.
    pub decisions: Vec<EpisodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgGraph {
    pub meeting: MeetingId,
    pub participants: Vec<ParticipantId>,
    /// Arena order of the meeting (depth-first preorder).
    pub nodes: Vec<ArgNode>,
}

fn is_issue(label: &ArgLabel) -> bool {
    matches!(label.category, Category::Issue | Category::Discussion)
}

impl ArgGraph {
    pub fn build(meeting: &Meeting) -> Self {
        let pos = meeting.episode_positions();
        let nodes = meeting
            .episodes
            .iter()
            .map(|e| ArgNode {
                id: e.id.clone(),
                label: e.label.clone(),
                speaker: e.attributed_speaker.clone(),
                target: e.target.clone(),
                parent: e.parent.as_ref().and_then(|p| pos.get(p.as_str()).copied()),
                start: e.start,
                end: e.end,
                replies: meeting
                    .replies_of(e.id.as_str())
                    .iter()
                    .filter_map(|t| pos.get(t.as_str()).copied())
                    .collect(),
            })
            .collect();
        ArgGraph {
            meeting: meeting.id.clone(),
            participants: meeting.participants.iter().map(|p| p.id.clone()).collect(),
            nodes,
        }
    }

    pub fn node(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn category(&self, i: usize) -> Category {
        self.nodes[i].label.category
    }

    /// Nodes reachable from `i` over one or more reply-to edges.
    pub fn reach(&self, i: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = self.nodes[i].replies.iter().copied().collect();
        while let Some(n) = queue.pop_front() {
            if seen.insert(n) {
                queue.extend(self.nodes[n].replies.iter().copied());
            }
        }
        seen
    }

    /// Issue an episode belongs to: the target of the nearest enclosing
    /// ISSUE or DISCUSSION that has one, else the id of the outermost such
    /// episode.
    pub fn issue_of(&self, i: usize) -> Option<String> {
        let mut cur = Some(i);
        let mut outermost = None;
        while let Some(n) = cur {
            let node = &self.nodes[n];
            if is_issue(&node.label) {
                if let Some(t) = &node.target {
                    return Some(t.clone());
                }
                outermost = Some(node.id.to_string());
            }
            cur = node.parent;
        }
        outermost
    }

    /// Issues in order of first appearance, with the episodes that name them.
    pub fn issues(&self) -> Vec<(String, Vec<usize>)> {
        let mut out: Vec<(String, Vec<usize>)> = Vec::new();
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| self.nodes[a].start.total_cmp(&self.nodes[b].start));
        for i in order {
            if !is_issue(&self.nodes[i].label) {
                continue;
            }
            let Some(issue) = self.issue_of(i) else { continue };
            match out.iter_mut().find(|(id, _)| *id == issue) {
                Some((_, eps)) => eps.push(i),
                None => out.push((issue, vec![i])),
            }
        }
        out
    }

    /// Alternative identifier of a PROPOSE node inside an issue.
    pub fn alternative_of(&self, i: usize) -> Option<String> {
        let n = &self.nodes[i];
        if n.label.category != Category::Propose || self.issue_of(i).is_none() {
            return None;
        }
        Some(n.target.clone().unwrap_or_else(|| n.id.to_string()))
    }

    /// PROPOSE nodes stating an alternative, by alternative id.
    pub fn alternatives(&self) -> BTreeMap<String, Vec<usize>> {
        let mut out: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for i in 0..self.nodes.len() {
            if let Some(a) = self.alternative_of(i) {
                out.entry(a).or_default().push(i);
            }
        }
        out
    }

    /// Alternatives of one issue in order of first proposal.
    pub fn alternatives_of_issue(&self, issue: &str) -> Vec<String> {
        let mut alts: Vec<(f64, String)> = Vec::new();
        for (alt, nodes) in self.alternatives() {
            if nodes.iter().any(|&n| self.issue_of(n).as_deref() == Some(issue)) {
                let start = nodes.iter().map(|&n| self.nodes[n].start).fold(f64::INFINITY, f64::min);
                alts.push((start, alt));
            }
        }
        alts.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        alts.into_iter().map(|(_, a)| a).collect()
    }

    /// Alternatives whose PROPOSE nodes are reachable from `i`.
    pub fn reached_alternatives(&self, i: usize) -> BTreeSet<String> {
        self.reach(i).into_iter().filter_map(|n| self.alternative_of(n)).collect()
    }

    pub fn polarity(&self, i: usize) -> Polarity {
        let n = &self.nodes[i];
        match n.label.category {
            Category::Accept | Category::Propose => Polarity::Pro,
            Category::Reject => Polarity::Con,
            Category::Justify => {
                let targets = n.replies.iter().map(|&t| self.category(t));
                let cats: Vec<Category> = targets.collect();
                if cats.contains(&Category::Reject) {
                    Polarity::Con
                } else if cats.iter().any(|c| matches!(c, Category::Accept | Category::Decision)) {
                    Polarity::Pro
                } else {
                    Polarity::Neutral
                }
            }
            _ => Polarity::Neutral,
        }
    }

    pub fn decisions(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.category(i) == Category::Decision).collect()
    }

    /// A decision node by episode id or by its target.
    pub fn decision(&self, reference: &str) -> Option<usize> {
        self.decisions().into_iter().find(|&i| {
            self.nodes[i].id == reference || self.nodes[i].target.as_deref() == Some(reference)
        })
    }

    /// Alternatives a decision node chooses (its direct PROPOSE targets).
    pub fn chosen_by(&self, decision: usize) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for &t in &self.nodes[decision].replies {
            if let Some(a) = self.alternative_of(t) {
                if !out.contains(&a) {
                    out.push(a);
                }
            }
        }
        out
    }

    /// Arguments (JUSTIFY and PROVIDE episodes) with what they bear on.
    pub fn criteria(&self) -> Vec<Criterion> {
        let mut out = Vec::new();
        for i in 0..self.nodes.len() {
            if !matches!(self.category(i), Category::Justify | Category::Provide) {
                continue;
            }
            let reach = self.reach(i);
            let alternatives: Vec<String> = reach
                .iter()
                .filter_map(|&n| self.alternative_of(n))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let decisions: Vec<EpisodeId> = reach
                .iter()
                .filter(|&&n| self.category(n) == Category::Decision)
                .map(|&n| self.nodes[n].id.clone())
                .collect();
            if alternatives.is_empty() && decisions.is_empty() {
                continue;
            }
            out.push(Criterion {
                episode: self.nodes[i].id.clone(),
                speaker: self.nodes[i].speaker.clone(),
                polarity: self.polarity(i),
                alternatives,
                decisions,
            });
        }
        out
    }

    /// PROPOSE nodes attributed to a participant.
    pub fn proposals_by(&self, speaker: &str) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| {
                self.category(i) == Category::Propose
                    && self.nodes[i].speaker.as_ref().is_some_and(|s| s == speaker)
            })
            .collect()
    }

    /// Participants whose REJECT chains reach at least `threshold` of the
    /// PROPOSE episodes attributed to `speaker`, each with the REJECT nodes
    /// involved. Empty when `speaker` proposed nothing.
    pub fn rejecters_of(&self, speaker: &str, threshold: f64) -> Vec<(ParticipantId, Vec<usize>)> {
        let props = self.proposals_by(speaker);
        if props.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for p in &self.participants {
            if p == speaker {
                continue;
            }
            let mut covered = BTreeSet::new();
            let mut used = Vec::new();
            for i in 0..self.nodes.len() {
                if self.category(i) != Category::Reject || self.nodes[i].speaker.as_ref() != Some(p) {
                    continue;
                }
                let reach = self.reach(i);
                let hit: Vec<usize> = props.iter().copied().filter(|x| reach.contains(x)).collect();
                if !hit.is_empty() {
                    covered.extend(hit);
                    used.push(i);
                }
            }
            if covered.len() as f64 >= threshold * props.len() as f64 && !used.is_empty() {
                out.push((p.clone(), used));
            }
        }
        out
    }
}
