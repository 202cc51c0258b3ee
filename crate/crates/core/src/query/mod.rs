//! Typed meeting queries and decision analytics over the reply-to graph.

mod analytics;
mod ast;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dialogue::Meeting;
use crate::graph::{ArgGraph, Polarity};
use crate::ids::{MeetingId, ParticipantId};
use crate::index::{search_passages, Granularity, IndexError, IndexSet, SegmentRef};
use crate::mds::Category;
use crate::text::Analyzer;

pub use crate::graph::Criterion;
pub use analytics::{
    assess_democratic, find_contradictions, judge, summarize_decisions, AlternativeStatus,
    AlternativeSummary, Contradiction, DecisionSummary, DemocraticRule, Judgement,
};
pub use ast::{parse_query, ArgKey, QueryAst, Template};

use analytics::{
    contradictions_in, decision_node, episode_ref, issue_decisions, stances_on_decision,
    summarize_graph,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueryError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("missing required argument: {0}")]
    MissingArgument(&'static str),
    #[error("{what} {id} not found")]
    NotFound { what: &'static str, id: String },
    #[error("{0} is not a DECISION")]
    NotADecision(String),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    Episodes,
    Entities,
    DecisionSummaries,
    Judgement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Pro,
    Con,
    Mixed,
    None,
}

/// One answer element: an episode, segment or entity with its support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerItem {
    pub meeting: MeetingId,
    pub id: String,
    /// Episode label, or the entity kind.
    pub label: String,
    pub speaker: Option<ParticipantId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub evidence: Vec<SegmentRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "value")]
pub enum Payload {
    Items(Vec<AnswerItem>),
    DecisionSummaries(Vec<DecisionSummary>),
    Judgement(Judgement),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub kind: AnswerKind,
    pub query: String,
    pub payload: Payload,
    /// Union of the evidence of all payload elements.
    pub evidence: Vec<SegmentRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stance: Option<Stance>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Set when the answer rests on a heuristic rather than a definition.
    pub heuristic: bool,
}

impl Answer {
    fn new(kind: AnswerKind, query: &QueryAst, payload: Payload) -> Self {
        let mut evidence: Vec<SegmentRef> = match &payload {
            Payload::Items(items) => items.iter().flat_map(|i| i.evidence.iter().cloned()).collect(),
            Payload::DecisionSummaries(s) => s.iter().flat_map(|d| d.evidence.iter().cloned()).collect(),
            Payload::Judgement(j) => j.evidence.clone(),
        };
        let mut seen = BTreeSet::new();
        evidence.retain(|e| seen.insert(e.clone()));
        Answer {
            kind,
            query: query.render(),
            payload,
            evidence,
            stance: None,
            notes: Vec::new(),
            heuristic: false,
        }
    }

    pub fn items(&self) -> &[AnswerItem] {
        match &self.payload {
            Payload::Items(items) => items,
            _ => &[],
        }
    }

    /// Ids of the payload elements in order.
    pub fn ids(&self) -> Vec<String> {
        match &self.payload {
            Payload::Items(items) => items.iter().map(|i| i.id.clone()).collect(),
            Payload::DecisionSummaries(s) => s.iter().map(|d| d.issue.clone()).collect(),
            Payload::Judgement(j) => vec![j.decision.to_string()],
        }
    }

    /// Plain-text rendering, one line per payload element.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.payload {
            Payload::Items(items) => {
                for i in items {
                    let mut line = format!("{}\t{}\t{}", i.meeting, i.id, i.label);
                    if let Some(s) = &i.speaker {
                        line.push_str(&format!("\t{s}"));
                    }
                    if let Some(d) = &i.detail {
                        line.push_str(&format!("\t{d}"));
                    }
                    out.push_str(&line);
                    out.push('\n');
                }
            }
            Payload::DecisionSummaries(s) => {
                for d in s {
                    let alts: Vec<String> = d
                        .alternatives
                        .iter()
                        .map(|a| format!("{}:{}", a.alternative, serde_json::to_value(a.status).unwrap().as_str().unwrap_or("")))
                        .collect();
                    let state = if d.open { "open" } else { "closed" };
                    out.push_str(&format!("{}\t{}\t{state}\t{}\n", d.meeting, d.issue, alts.join(" ")));
                }
            }
            Payload::Judgement(j) => {
                out.push_str(&format!(
                    "{}\t{}\taccepts={} rejects={} participants={} rule={}\n",
                    j.decision,
                    j.verdict,
                    j.explicit_accepts,
                    j.explicit_rejects,
                    j.participants,
                    j.rule.as_str()
                ));
            }
        }
        if let Some(s) = self.stance {
            out.push_str(&format!("stance: {}\n", serde_json::to_value(s).unwrap().as_str().unwrap_or("")));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// Answer listing the decision summaries of the given meetings.
pub fn summaries_answer(meetings: &[Meeting]) -> Answer {
    let summaries: Vec<DecisionSummary> = meetings.iter().flat_map(summarize_decisions).collect();
    let pseudo = QueryAst { template: Template::OpenIssues, args: Default::default() };
    let mut a = Answer::new(AnswerKind::DecisionSummaries, &pseudo, Payload::DecisionSummaries(summaries));
    a.query = "summaries()".into();
    a
}

struct Ctx<'a> {
    graphs: Vec<ArgGraph>,
    index: &'a IndexSet,
    analyzer: &'a Analyzer,
}

fn item(g: &ArgGraph, i: usize, detail: Option<String>) -> AnswerItem {
    let n = &g.nodes[i];
    AnswerItem {
        meeting: g.meeting.clone(),
        id: n.id.to_string(),
        label: n.label.to_string(),
        speaker: n.speaker.clone(),
        detail,
        evidence: vec![episode_ref(g, i)],
    }
}

fn by_time(g: &ArgGraph, nodes: &mut Vec<usize>) {
    nodes.sort_by(|&a, &b| g.nodes[a].start.total_cmp(&g.nodes[b].start).then(a.cmp(&b)));
    nodes.dedup();
}

fn speaker_is(g: &ArgGraph, i: usize, s: &str) -> bool {
    g.nodes[i].speaker.as_ref().is_some_and(|x| x == s)
}

/// Evaluates a query over the corpus (annotation graphs) and the index
/// snapshot (`find`). Results follow meeting-id order, then time.
pub fn execute(
    ast: &QueryAst,
    index: &IndexSet,
    corpus: &[Meeting],
    analyzer: &Analyzer,
) -> Result<Answer, QueryError> {
    let scope = ast.get(ArgKey::Meeting);
    let mut in_scope: Vec<&Meeting> = corpus.iter().filter(|m| scope.is_none_or(|s| m.id == s)).collect();
    if let Some(s) = scope {
        if in_scope.is_empty() {
            return Err(QueryError::NotFound { what: "meeting", id: s.to_owned() });
        }
    }
    in_scope.sort_by(|a, b| a.id.cmp(&b.id));
    let ctx = Ctx { graphs: in_scope.iter().map(|m| ArgGraph::build(m)).collect(), index, analyzer };
    ctx.run(ast)
}

impl Ctx<'_> {
    fn require_speaker(&self, s: &str) -> Result<(), QueryError> {
        if self.graphs.iter().any(|g| g.participants.iter().any(|p| p == s)) {
            Ok(())
        } else {
            Err(QueryError::NotFound { what: "participant", id: s.to_owned() })
        }
    }

    fn require_issue(&self, issue: &str) -> Result<(), QueryError> {
        if self.graphs.iter().any(|g| g.issues().iter().any(|(i, _)| i == issue)) {
            Ok(())
        } else {
            Err(QueryError::NotFound { what: "issue", id: issue.to_owned() })
        }
    }

    /// PROPOSE nodes of an alternative, optionally restricted to an issue.
    fn alternative_nodes(g: &ArgGraph, alt: &str, issue: Option<&str>) -> Vec<usize> {
        g.alternatives()
            .remove(alt)
            .unwrap_or_default()
            .into_iter()
            .filter(|&n| issue.is_none_or(|i| g.issue_of(n).as_deref() == Some(i)))
            .collect()
    }

    fn require_alternative(&self, alt: &str, issue: Option<&str>) -> Result<(), QueryError> {
        if self.graphs.iter().any(|g| !Self::alternative_nodes(g, alt, issue).is_empty()) {
            Ok(())
        } else {
            Err(QueryError::NotFound { what: "alternative", id: alt.to_owned() })
        }
    }

    fn objection_nodes(g: &ArgGraph, props: &[usize]) -> Vec<usize> {
        let rejects: Vec<usize> = (0..g.nodes.len())
            .filter(|&i| g.category(i) == Category::Reject && g.reach(i).iter().any(|n| props.contains(n)))
            .collect();
        let mut out = rejects.clone();
        out.extend((0..g.nodes.len()).filter(|&i| {
            g.category(i) == Category::Justify && g.nodes[i].replies.iter().any(|r| rejects.contains(r))
        }));
        by_time(g, &mut out);
        out
    }

    fn run(&self, ast: &QueryAst) -> Result<Answer, QueryError> {
        let arg = |k: ArgKey| ast.get(k);
        let req = |k: ArgKey| ast.get(k).ok_or(QueryError::MissingArgument(k.as_str()));
        let episodes = |items: Vec<AnswerItem>| Answer::new(AnswerKind::Episodes, ast, Payload::Items(items));
        let entities = |items: Vec<AnswerItem>| Answer::new(AnswerKind::Entities, ast, Payload::Items(items));
        match ast.template {
            Template::Objections => {
                let alt = req(ArgKey::Alternative)?;
                let issue = arg(ArgKey::Issue);
                self.require_alternative(alt, issue)?;
                let mut items = Vec::new();
                for g in &self.graphs {
                    let props = Self::alternative_nodes(g, alt, issue);
                    if props.is_empty() {
                        continue;
                    }
                    items.extend(Self::objection_nodes(g, &props).into_iter().map(|i| item(g, i, None)));
                }
                Ok(episodes(items))
            }
            Template::Position => {
                let speaker = req(ArgKey::Speaker)?;
                let issue = req(ArgKey::Issue)?;
                self.require_speaker(speaker)?;
                self.require_issue(issue)?;
                let (mut pro, mut con) = (0, 0);
                let mut items = Vec::new();
                for g in &self.graphs {
                    let mut nodes: Vec<usize> = (0..g.nodes.len())
                        .filter(|&i| {
                            matches!(g.category(i), Category::Accept | Category::Reject | Category::Propose | Category::Justify)
                                && speaker_is(g, i, speaker)
                                && g.issue_of(i).as_deref() == Some(issue)
                        })
                        .collect();
                    by_time(g, &mut nodes);
                    for i in nodes {
                        let p = g.polarity(i);
                        match p {
                            Polarity::Pro => pro += 1,
                            Polarity::Con => con += 1,
                            Polarity::Neutral => {}
                        }
                        items.push(item(g, i, Some(polarity_str(p).to_owned())));
                    }
                }
                let mut a = episodes(items);
                a.stance = Some(match (pro, con) {
                    (0, 0) => Stance::None,
                    (p, c) if p > c => Stance::Pro,
                    (p, c) if c > p => Stance::Con,
                    _ => Stance::Mixed,
                });
                a.notes.push(format!("{pro} supporting, {con} opposing"));
                Ok(a)
            }
            Template::Contributions => {
                let speaker = req(ArgKey::Speaker)?;
                let alt = req(ArgKey::Alternative)?;
                let issue = arg(ArgKey::Issue);
                let any = arg(ArgKey::Stance) == Some("any");
                self.require_speaker(speaker)?;
                self.require_alternative(alt, issue)?;
                let mut items = Vec::new();
                for g in &self.graphs {
                    let props = Self::alternative_nodes(g, alt, issue);
                    if props.is_empty() {
                        continue;
                    }
                    let mut nodes: Vec<usize> = (0..g.nodes.len())
                        .filter(|&i| speaker_is(g, i, speaker))
                        .filter(|&i| {
                            if props.contains(&i) {
                                return true;
                            }
                            if !g.reach(i).iter().any(|n| props.contains(n)) {
                                return false;
                            }
                            match g.polarity(i) {
                                Polarity::Pro => true,
                                Polarity::Con => false,
                                Polarity::Neutral => {
                                    any && matches!(g.category(i), Category::Ask | Category::Provide | Category::Justify)
                                }
                            }
                        })
                        .collect();
                    by_time(g, &mut nodes);
                    items.extend(nodes.into_iter().map(|i| item(g, i, None)));
                }
                Ok(episodes(items))
            }
            Template::Supporters => {
                let speaker = req(ArgKey::Speaker)?;
                let issue = arg(ArgKey::Issue);
                self.require_speaker(speaker)?;
                if let Some(i) = issue {
                    self.require_issue(i)?;
                }
                let mut found: Vec<(ParticipantId, Vec<SegmentRef>)> = Vec::new();
                for g in &self.graphs {
                    let props: Vec<usize> = g
                        .proposals_by(speaker)
                        .into_iter()
                        .filter(|&n| issue.is_none_or(|i| g.issue_of(n).as_deref() == Some(i)))
                        .collect();
                    if props.is_empty() {
                        continue;
                    }
                    let mut support: Vec<usize> = (0..g.nodes.len())
                        .filter(|&i| {
                            matches!(g.category(i), Category::Accept | Category::Justify)
                                && g.polarity(i) == Polarity::Pro
                                && !speaker_is(g, i, speaker)
                                && g.reach(i).iter().any(|n| props.contains(n))
                        })
                        .collect();
                    by_time(g, &mut support);
                    for p in &g.participants {
                        let eps: Vec<SegmentRef> = support
                            .iter()
                            .filter(|&&i| speaker_is(g, i, p.as_str()))
                            .map(|&i| episode_ref(g, i))
                            .collect();
                        if eps.is_empty() {
                            continue;
                        }
                        match found.iter_mut().find(|(q, _)| q == p) {
                            Some((_, ev)) => ev.extend(eps),
                            None => found.push((p.clone(), eps)),
                        }
                    }
                }
                Ok(entities(self.participant_items(found)))
            }
            Template::Rejecters => {
                let speaker = req(ArgKey::Speaker)?;
                self.require_speaker(speaker)?;
                let mut total = 0usize;
                let mut covered: Vec<(ParticipantId, usize, Vec<SegmentRef>)> = Vec::new();
                for g in &self.graphs {
                    let props = g.proposals_by(speaker);
                    total += props.len();
                    for p in &g.participants {
                        if p == speaker {
                            continue;
                        }
                        let rejects: Vec<usize> = (0..g.nodes.len())
                            .filter(|&i| g.category(i) == Category::Reject && speaker_is(g, i, p.as_str()))
                            .collect();
                        let hit: BTreeSet<usize> = rejects
                            .iter()
                            .flat_map(|&r| g.reach(r).into_iter().filter(|n| props.contains(n)))
                            .collect();
                        let used: Vec<SegmentRef> = rejects
                            .iter()
                            .filter(|&&r| g.reach(r).iter().any(|n| props.contains(n)))
                            .map(|&r| episode_ref(g, r))
                            .collect();
                        match covered.iter_mut().find(|(q, _, _)| q == p) {
                            Some((_, n, ev)) => {
                                *n += hit.len();
                                ev.extend(used);
                            }
                            None => covered.push((p.clone(), hit.len(), used)),
                        }
                    }
                }
                let found = covered
                    .into_iter()
                    .filter(|(_, n, ev)| total > 0 && *n == total && !ev.is_empty())
                    .map(|(p, _, ev)| (p, ev))
                    .collect();
                Ok(entities(self.participant_items(found)))
            }
            Template::Chosen => {
                let issue = req(ArgKey::Issue)?;
                self.require_issue(issue)?;
                let mut items = Vec::new();
                for g in &self.graphs {
                    let alts = g.alternatives();
                    for d in issue_decisions(g, issue) {
                        for a in g.chosen_by(d) {
                            if items.iter().any(|i: &AnswerItem| i.id == a && i.meeting == g.meeting) {
                                continue;
                            }
                            let mut evidence = vec![episode_ref(g, d)];
                            evidence.extend(alts[&a].iter().map(|&n| episode_ref(g, n)));
                            items.push(AnswerItem {
                                meeting: g.meeting.clone(),
                                speaker: g.nodes[alts[&a][0]].speaker.clone(),
                                id: a,
                                label: "alternative".into(),
                                detail: Some(format!("decided by {}", g.nodes[d].id)),
                                evidence,
                            });
                        }
                    }
                }
                Ok(entities(items))
            }
            Template::WhyRejected => {
                let alt = req(ArgKey::Alternative)?;
                let issue = arg(ArgKey::Issue);
                self.require_alternative(alt, issue)?;
                let mut items: Vec<AnswerItem> = Vec::new();
                let mut notes = Vec::new();
                for g in &self.graphs {
                    let props = Self::alternative_nodes(g, alt, issue);
                    if props.is_empty() {
                        continue;
                    }
                    let issues: BTreeSet<String> = props.iter().filter_map(|&n| g.issue_of(n)).collect();
                    let decisions: Vec<usize> = issues.iter().flat_map(|i| issue_decisions(g, i)).collect();
                    let chosen: BTreeSet<String> = decisions.iter().flat_map(|&d| g.chosen_by(d)).collect();
                    if chosen.contains(alt) {
                        notes.push(format!("{alt} was chosen in {}", g.meeting));
                        continue;
                    }
                    let mut nodes = Self::objection_nodes(g, &props);
                    let dec_ids: Vec<_> = decisions.iter().map(|&d| g.nodes[d].id.clone()).collect();
                    for c in g.criteria() {
                        if c.alternatives.iter().any(|a| chosen.contains(a)) || c.decisions.iter().any(|d| dec_ids.contains(d)) {
                            nodes.extend(g.node(c.episode.as_str()));
                        }
                    }
                    by_time(g, &mut nodes);
                    items.extend(nodes.into_iter().map(|i| item(g, i, None)));
                }
                let mut a = episodes(items);
                a.notes = notes;
                Ok(a)
            }
            Template::OpenIssues => {
                let mut items = Vec::new();
                for g in &self.graphs {
                    let summaries = summarize_graph(g);
                    let alts = g.alternatives();
                    for s in summaries.into_iter().filter(|s| s.open) {
                        let mut evidence = s.evidence.clone();
                        let props: Vec<usize> = s
                            .alternatives
                            .iter()
                            .flat_map(|a| alts[&a.alternative].iter().copied())
                            .collect();
                        evidence.extend(Self::objection_nodes(g, &props).into_iter().map(|i| episode_ref(g, i)));
                        items.push(AnswerItem {
                            meeting: g.meeting.clone(),
                            id: s.issue.clone(),
                            label: "issue".into(),
                            speaker: None,
                            detail: Some(format!("{} alternative(s), no decision", s.alternatives.len())),
                            evidence,
                        });
                    }
                }
                let mut a = entities(items);
                a.heuristic = true;
                a.notes.push("reasons for non-decision are approximated by the issue's unresolved objections".into());
                Ok(a)
            }
            Template::Criteria | Template::DissentCriteria => {
                let reference = req(ArgKey::Decision)?;
                let (g, d) = self.decision(reference)?;
                let alts = g.chosen_by(d);
                let dissenters = if ast.template == Template::DissentCriteria {
                    Some(stances_on_decision(g, d, Category::Reject).0)
                } else {
                    None
                };
                let mut nodes: Vec<usize> = g
                    .criteria()
                    .into_iter()
                    .filter(|c| c.alternatives.iter().any(|a| alts.contains(a)) || c.decisions.contains(&g.nodes[d].id))
                    .filter(|c| {
                        dissenters.as_ref().is_none_or(|ds| c.speaker.as_ref().is_some_and(|s| ds.contains(s)))
                    })
                    .filter_map(|c| g.node(c.episode.as_str()))
                    .collect();
                by_time(g, &mut nodes);
                let items = nodes
                    .into_iter()
                    .map(|i| item(g, i, Some(polarity_str(g.polarity(i)).to_owned())))
                    .collect();
                Ok(episodes(items))
            }
            Template::Contradictions => {
                let speaker = arg(ArgKey::Speaker);
                let issue = arg(ArgKey::Issue);
                if let Some(s) = speaker {
                    self.require_speaker(s)?;
                }
                if let Some(i) = issue {
                    self.require_issue(i)?;
                }
                let mut items = Vec::new();
                for g in &self.graphs {
                    for c in contradictions_in(g, speaker) {
                        if let Some(i) = issue {
                            let in_issue = g
                                .alternatives()
                                .get(&c.alternative)
                                .is_some_and(|ns| ns.iter().any(|&n| g.issue_of(n).as_deref() == Some(i)));
                            if !in_issue {
                                continue;
                            }
                        }
                        let a = g.node(c.earlier.as_str()).expect("node exists");
                        let b = g.node(c.later.as_str()).expect("node exists");
                        items.push(AnswerItem {
                            meeting: g.meeting.clone(),
                            id: format!("{}>{}", c.earlier, c.later),
                            label: c.alternative.clone(),
                            speaker: Some(c.participant.clone()),
                            detail: Some(format!("{} then {}", g.nodes[a].label, g.nodes[b].label)),
                            evidence: vec![episode_ref(g, a), episode_ref(g, b)],
                        });
                    }
                }
                Ok(episodes(items))
            }
            Template::Democratic => {
                let reference = req(ArgKey::Decision)?;
                let (g, _) = self.decision(reference)?;
                let j = judge(g, reference, DemocraticRule::default())?;
                Ok(Answer::new(AnswerKind::Judgement, ast, Payload::Judgement(j)))
            }
            Template::Find => {
                let terms = req(ArgKey::Terms)?;
                let granularity: Granularity = arg(ArgKey::Granularity).unwrap_or("episode").parse()?;
                let result = search_passages(self.index, arg(ArgKey::Meeting), terms, granularity, self.analyzer)?;
                let items = result
                    .hits
                    .iter()
                    .map(|h| AnswerItem {
                        meeting: h.segment.meeting.clone(),
                        id: h.segment.id.clone(),
                        label: h.segment.granularity.to_string(),
                        speaker: None,
                        detail: Some(format!("{:.4} {}", h.score, h.matched.join(","))),
                        evidence: vec![h.segment.clone()],
                    })
                    .collect();
                let mut a = episodes(items);
                if !result.unmatched.is_empty() {
                    a.notes.push(format!("unmatched: {}", result.unmatched.join(" ")));
                }
                Ok(a)
            }
        }
    }

    fn decision(&self, reference: &str) -> Result<(&ArgGraph, usize), QueryError> {
        let mut last_err = QueryError::NotFound { what: "decision", id: reference.to_owned() };
        for g in &self.graphs {
            match decision_node(g, reference) {
                Ok(d) => return Ok((g, d)),
                Err(e @ QueryError::NotADecision(_)) => last_err = e,
                Err(_) => {}
            }
        }
        Err(last_err)
    }

    fn participant_items(&self, found: Vec<(ParticipantId, Vec<SegmentRef>)>) -> Vec<AnswerItem> {
        found
            .into_iter()
            .map(|(p, evidence)| AnswerItem {
                meeting: evidence[0].meeting.clone(),
                id: p.to_string(),
                label: "participant".into(),
                speaker: Some(p),
                detail: None,
                evidence,
            })
            .collect()
    }
}

fn polarity_str(p: Polarity) -> &'static str {
    match p {
        Polarity::Pro => "pro",
        Polarity::Con => "con",
        Polarity::Neutral => "neutral",
    }
}
