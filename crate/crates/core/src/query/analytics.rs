use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dialogue::Meeting;
use crate::graph::{ArgGraph, Criterion, Polarity};
use crate::ids::{EpisodeId, MeetingId, ParticipantId};
use crate::index::{Granularity, SegmentRef};
use crate::mds::Category;

use super::QueryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlternativeStatus {
    Accepted,
    Rejected,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSummary {
    pub alternative: String,
    pub proposer: Option<ParticipantId>,
    pub status: AlternativeStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionSummary {
    pub meeting: MeetingId,
    pub issue: String,
    pub alternatives: Vec<AlternativeSummary>,
    pub decision: Option<EpisodeId>,
    pub criteria: Vec<Criterion>,
    pub open: bool,
    pub evidence: Vec<SegmentRef>,
}

pub(crate) fn episode_ref(g: &ArgGraph, i: usize) -> SegmentRef {
    SegmentRef::new(&g.meeting, Granularity::Episode, g.nodes[i].id.as_str())
}

/// Decision nodes choosing an alternative of `issue`, in arena order.
pub(crate) fn issue_decisions(g: &ArgGraph, issue: &str) -> Vec<usize> {
    let alts = g.alternatives_of_issue(issue);
    g.decisions()
        .into_iter()
        .filter(|&d| g.chosen_by(d).iter().any(|a| alts.contains(a)))
        .collect()
}

fn reaching(g: &ArgGraph, category: Category, props: &[usize]) -> Vec<usize> {
    (0..g.nodes.len())
        .filter(|&i| g.category(i) == category && g.reach(i).iter().any(|n| props.contains(n)))
        .collect()
}

/// One summary per issue, in order of first appearance.
pub fn summarize_decisions(meeting: &Meeting) -> Vec<DecisionSummary> {
    summarize_graph(&ArgGraph::build(meeting))
}

pub(crate) fn summarize_graph(g: &ArgGraph) -> Vec<DecisionSummary> {
    let all_alts = g.alternatives();
    let criteria = g.criteria();
    let mut out = Vec::new();
    for (issue, eps) in g.issues() {
        let alts = g.alternatives_of_issue(&issue);
        let decisions = issue_decisions(g, &issue);
        let chosen: BTreeSet<String> = decisions.iter().flat_map(|&d| g.chosen_by(d)).collect();
        let mut evidence: Vec<SegmentRef> = eps.iter().map(|&i| episode_ref(g, i)).collect();
        evidence.extend(decisions.iter().map(|&d| episode_ref(g, d)));
        let alternatives = alts
            .iter()
            .map(|a| {
                let props = &all_alts[a];
                let status = if chosen.contains(a) {
                    AlternativeStatus::Accepted
                } else if !decisions.is_empty() {
                    AlternativeStatus::Rejected
                } else {
                    let acc = !reaching(g, Category::Accept, props).is_empty();
                    let rej = !reaching(g, Category::Reject, props).is_empty();
                    match (acc, rej) {
                        (true, false) => AlternativeStatus::Accepted,
                        (false, true) => AlternativeStatus::Rejected,
                        _ => AlternativeStatus::Undecided,
                    }
                };
                AlternativeSummary {
                    alternative: a.clone(),
                    proposer: g.nodes[props[0]].speaker.clone(),
                    status,
                }
            })
            .collect();
        let decision_ids: Vec<&EpisodeId> = decisions.iter().map(|&d| &g.nodes[d].id).collect();
        let attached = criteria
            .iter()
            .filter(|c| {
                c.alternatives.iter().any(|a| alts.contains(a))
                    || c.decisions.iter().any(|d| decision_ids.contains(&d))
            })
            .cloned()
            .collect();
        out.push(DecisionSummary {
            meeting: g.meeting.clone(),
            issue,
            alternatives,
            decision: decisions.first().map(|&d| g.nodes[d].id.clone()),
            criteria: attached,
            open: decisions.is_empty(),
            evidence,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contradiction {
    pub meeting: MeetingId,
    pub participant: ParticipantId,
    pub alternative: String,
    pub earlier: EpisodeId,
    pub later: EpisodeId,
}

fn family(g: &ArgGraph, i: usize) -> Option<(u8, Polarity)> {
    match g.category(i) {
        Category::Accept => Some((0, Polarity::Pro)),
        Category::Reject => Some((0, Polarity::Con)),
        Category::Justify => match g.polarity(i) {
            Polarity::Neutral => None,
            p => Some((1, p)),
        },
        _ => None,
    }
}

/// Pairs of one participant's episodes with opposite polarity (ACCEPT vs
/// REJECT, or supporting vs opposing JUSTIFY) that reach the same
/// alternative.
pub fn find_contradictions(meeting: &Meeting, speaker: Option<&str>) -> Vec<Contradiction> {
    contradictions_in(&ArgGraph::build(meeting), speaker)
}

pub(crate) fn contradictions_in(g: &ArgGraph, speaker: Option<&str>) -> Vec<Contradiction> {
    let mut acts: Vec<usize> = (0..g.nodes.len())
        .filter(|&i| family(g, i).is_some() && g.nodes[i].speaker.is_some())
        .filter(|&i| speaker.is_none_or(|s| g.nodes[i].speaker.as_ref().is_some_and(|x| x == s)))
        .collect();
    acts.sort_by(|&a, &b| g.nodes[a].start.total_cmp(&g.nodes[b].start).then(a.cmp(&b)));
    let mut out = Vec::new();
    for (k, &a) in acts.iter().enumerate() {
        for &b in &acts[k + 1..] {
            let (na, nb) = (&g.nodes[a], &g.nodes[b]);
            if na.speaker != nb.speaker {
                continue;
            }
            let (fa, pa) = family(g, a).expect("filtered");
            let (fb, pb) = family(g, b).expect("filtered");
            if fa != fb || pa == pb {
                continue;
            }
            let shared = g.reached_alternatives(a);
            for alt in shared.intersection(&g.reached_alternatives(b)) {
                out.push(Contradiction {
                    meeting: g.meeting.clone(),
                    participant: na.speaker.clone().expect("filtered"),
                    alternative: alt.clone(),
                    earlier: na.id.clone(),
                    later: nb.id.clone(),
                });
            }
        }
    }
    out
}

/// How a decision is judged democratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemocraticRule {
    /// More than half of all listed participants explicitly accept;
    /// abstention counts against.
    #[default]
    StrictMajority,
    /// Every listed participant explicitly accepts.
    Unanimity,
    /// More explicit accepts than explicit rejects.
    MajorityOfVoters,
}

impl DemocraticRule {
    pub fn as_str(self) -> &'static str {
        match self {
            DemocraticRule::StrictMajority => "strict-majority",
            DemocraticRule::Unanimity => "unanimity",
            DemocraticRule::MajorityOfVoters => "majority-of-voters",
        }
    }

    fn holds(self, accepts: usize, rejects: usize, participants: usize) -> bool {
        match self {
            DemocraticRule::StrictMajority => 2 * accepts > participants,
            DemocraticRule::Unanimity => participants > 0 && accepts == participants,
            DemocraticRule::MajorityOfVoters => accepts > rejects,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgement {
    pub decision: EpisodeId,
    pub verdict: bool,
    pub explicit_accepts: usize,
    pub explicit_rejects: usize,
    pub participants: usize,
    pub rule: DemocraticRule,
    pub accepters: Vec<ParticipantId>,
    pub rejecters: Vec<ParticipantId>,
    pub evidence: Vec<SegmentRef>,
}

pub fn assess_democratic(meeting: &Meeting, decision: &str) -> Result<Judgement, QueryError> {
    judge(&ArgGraph::build(meeting), decision, DemocraticRule::default())
}

pub(crate) fn decision_node(g: &ArgGraph, reference: &str) -> Result<usize, QueryError> {
    if let Some(d) = g.decision(reference) {
        return Ok(d);
    }
    match g.node(reference) {
        Some(_) => Err(QueryError::NotADecision(reference.to_owned())),
        None => Err(QueryError::NotFound { what: "decision", id: reference.to_owned() }),
    }
}

/// Participants whose episodes of `category` reach the PROPOSE nodes of the
/// alternatives chosen by `decision`, with those episodes.
pub(crate) fn stances_on_decision(
    g: &ArgGraph,
    decision: usize,
    category: Category,
) -> (Vec<ParticipantId>, Vec<usize>) {
    let alts = g.alternatives();
    let props: Vec<usize> = g
        .chosen_by(decision)
        .iter()
        .flat_map(|a| alts[a].iter().copied())
        .chain(std::iter::once(decision))
        .collect();
    let eps = reaching(g, category, &props);
    let mut who: Vec<ParticipantId> = Vec::new();
    for &i in &eps {
        if let Some(s) = &g.nodes[i].speaker {
            if !who.contains(s) {
                who.push(s.clone());
            }
        }
    }
    (who, eps)
}

pub fn judge(g: &ArgGraph, decision: &str, rule: DemocraticRule) -> Result<Judgement, QueryError> {
    let d = decision_node(g, decision)?;
    let (accepters, acc_eps) = stances_on_decision(g, d, Category::Accept);
    let (rejecters, rej_eps) = stances_on_decision(g, d, Category::Reject);
    let participants = g.participants.len();
    let mut evidence = vec![episode_ref(g, d)];
    evidence.extend(acc_eps.iter().chain(&rej_eps).map(|&i| episode_ref(g, i)));
    Ok(Judgement {
        decision: g.nodes[d].id.clone(),
        verdict: rule.holds(accepters.len(), rejecters.len(), participants),
        explicit_accepts: accepters.len(),
        explicit_rejects: rejecters.len(),
        participants,
        rule,
        accepters,
        rejecters,
        evidence,
    })
}
