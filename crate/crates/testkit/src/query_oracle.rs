//! Reference answers for the graph-only query templates, computed from the
//! raw episode list with a Warshall transitive closure of the reply-to
//! relation. Answers are reduced to comparable rows.

use std::collections::{BTreeMap, BTreeSet};

use ibismeet_core::graph::ArgGraph;
use ibismeet_core::index::{build_indexes, IndexConfig};
use ibismeet_core::query::{execute, Answer, ArgKey, Payload, QueryAst, Template};
use ibismeet_core::text::Analyzer;
use ibismeet_core::{Category, Execution, Meeting};

/// `(meeting, id, tag)`; the tag carries polarity or alternative where the
/// template reports one. Participant answers use `*` for the meeting.
pub type Row = (String, String, String);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Reduced {
    pub rows: BTreeSet<Row>,
    pub stance: Option<String>,
    /// (verdict, accepts, rejects, participants)
    pub judgement: Option<(bool, usize, usize, usize)>,
}

struct View {
    meeting: String,
    participants: Vec<String>,
    id: Vec<String>,
    cat: Vec<Category>,
    speaker: Vec<Option<String>>,
    target: Vec<Option<String>>,
    parent: Vec<Option<usize>>,
    start: Vec<f64>,
    direct: Vec<Vec<bool>>,
    closure: Vec<Vec<bool>>,
}

impl View {
    fn new(m: &Meeting) -> View {
        let n = m.episodes.len();
        let index: BTreeMap<&str, usize> = m.episodes.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
        let mut direct = vec![vec![false; n]; n];
        for edge in &m.reply_to {
            let Some(&s) = index.get(edge.from.as_str()) else { continue };
            for t in &edge.to {
                if let Some(&t) = index.get(t.as_str()) {
                    direct[s][t] = true;
                }
            }
        }
        let mut closure = direct.clone();
        #[allow(clippy::needless_range_loop)]
        for k in 0..n {
            for i in 0..n {
                if closure[i][k] {
                    for j in 0..n {
                        if closure[k][j] {
                            closure[i][j] = true;
                        }
                    }
                }
            }
        }
        View {
            meeting: m.id.to_string(),
            participants: m.participants.iter().map(|p| p.id.to_string()).collect(),
            id: m.episodes.iter().map(|e| e.id.to_string()).collect(),
            cat: m.episodes.iter().map(|e| e.label.category).collect(),
            speaker: m.episodes.iter().map(|e| e.attributed_speaker.as_ref().map(|s| s.to_string())).collect(),
            target: m.episodes.iter().map(|e| e.target.clone()).collect(),
            parent: m
                .episodes
                .iter()
                .map(|e| e.parent.as_ref().and_then(|p| index.get(p.as_str()).copied()))
                .collect(),
            start: m.episodes.iter().map(|e| e.start).collect(),
            direct,
            closure,
        }
    }

    fn n(&self) -> usize {
        self.id.len()
    }

    fn said_by(&self, i: usize, s: &str) -> bool {
        self.speaker[i].as_deref() == Some(s)
    }

    fn issue_of(&self, i: usize) -> Option<String> {
        let mut chain = Vec::new();
        let mut cur = Some(i);
        while let Some(c) = cur {
            chain.push(c);
            cur = self.parent[c];
        }
        let issues: Vec<usize> = chain
            .into_iter()
            .filter(|&c| matches!(self.cat[c], Category::Issue | Category::Discussion))
            .collect();
        if let Some(&c) = issues.iter().find(|&&c| self.target[c].is_some()) {
            return self.target[c].clone();
        }
        issues.last().map(|&c| self.id[c].clone())
    }

    fn issues(&self) -> BTreeSet<String> {
        (0..self.n())
            .filter(|&i| matches!(self.cat[i], Category::Issue | Category::Discussion))
            .filter_map(|i| self.issue_of(i))
            .collect()
    }

    fn alt_of(&self, i: usize) -> Option<String> {
        if self.cat[i] != Category::Propose {
            return None;
        }
        self.issue_of(i)?;
        Some(self.target[i].clone().unwrap_or_else(|| self.id[i].clone()))
    }

    fn props(&self, alt: &str, issue: Option<&str>) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.alt_of(i).as_deref() == Some(alt))
            .filter(|&i| issue.is_none_or(|s| self.issue_of(i).as_deref() == Some(s)))
            .collect()
    }

    fn reaches_any(&self, i: usize, set: &[usize]) -> bool {
        set.iter().any(|&p| self.closure[i][p])
    }

    fn polarity(&self, i: usize) -> &'static str {
        match self.cat[i] {
            Category::Accept | Category::Propose => "pro",
            Category::Reject => "con",
            Category::Justify => {
                let targets: Vec<Category> = (0..self.n()).filter(|&t| self.direct[i][t]).map(|t| self.cat[t]).collect();
                if targets.contains(&Category::Reject) {
                    "con"
                } else if targets.iter().any(|c| matches!(c, Category::Accept | Category::Decision)) {
                    "pro"
                } else {
                    "neutral"
                }
            }
            _ => "neutral",
        }
    }

    fn chosen_by(&self, d: usize) -> BTreeSet<String> {
        (0..self.n()).filter(|&t| self.direct[d][t]).filter_map(|t| self.alt_of(t)).collect()
    }

    fn alts_of_issue(&self, issue: &str) -> BTreeSet<String> {
        (0..self.n())
            .filter(|&i| self.issue_of(i).as_deref() == Some(issue))
            .filter_map(|i| self.alt_of(i))
            .collect()
    }

    fn decisions_of_issue(&self, issue: &str) -> Vec<usize> {
        let alts = self.alts_of_issue(issue);
        (0..self.n())
            .filter(|&d| self.cat[d] == Category::Decision)
            .filter(|&d| !self.chosen_by(d).is_disjoint(&alts))
            .collect()
    }

    fn objections(&self, props: &[usize]) -> BTreeSet<usize> {
        let rejects: Vec<usize> =
            (0..self.n()).filter(|&r| self.cat[r] == Category::Reject && self.reaches_any(r, props)).collect();
        let mut out: BTreeSet<usize> = rejects.iter().copied().collect();
        for j in 0..self.n() {
            if self.cat[j] == Category::Justify && rejects.iter().any(|&r| self.direct[j][r]) {
                out.insert(j);
            }
        }
        out
    }

    /// Criterion episodes with the alternatives and decisions they reach.
    fn criteria(&self) -> Vec<(usize, BTreeSet<String>, BTreeSet<usize>)> {
        let mut out = Vec::new();
        for c in 0..self.n() {
            if !matches!(self.cat[c], Category::Justify | Category::Provide) {
                continue;
            }
            let reached: Vec<usize> = (0..self.n()).filter(|&t| self.closure[c][t]).collect();
            let alts: BTreeSet<String> = reached.iter().filter_map(|&t| self.alt_of(t)).collect();
            let decs: BTreeSet<usize> = reached.iter().copied().filter(|&t| self.cat[t] == Category::Decision).collect();
            if !alts.is_empty() || !decs.is_empty() {
                out.push((c, alts, decs));
            }
        }
        out
    }

    /// Participants with `category` episodes reaching the decision or the
    /// PROPOSE episodes of what it chose.
    fn stance_holders(&self, d: usize, category: Category) -> BTreeSet<String> {
        let chosen = self.chosen_by(d);
        let mut targets: Vec<usize> =
            (0..self.n()).filter(|&p| self.alt_of(p).is_some_and(|a| chosen.contains(&a))).collect();
        targets.push(d);
        (0..self.n())
            .filter(|&i| self.cat[i] == category && self.reaches_any(i, &targets))
            .filter_map(|i| self.speaker[i].clone())
            .collect()
    }

    fn row(&self, i: usize, tag: &str) -> Row {
        (self.meeting.clone(), self.id[i].clone(), tag.to_owned())
    }

    fn find_decision(&self, reference: &str) -> Option<usize> {
        (0..self.n()).find(|&i| {
            self.cat[i] == Category::Decision && (self.id[i] == reference || self.target[i].as_deref() == Some(reference))
        })
    }
}

/// Reference answer for one of the twelve graph templates; `None` where
/// the engine is expected to report a missing entity.
pub fn oracle_answer(corpus: &[Meeting], ast: &QueryAst) -> Option<Reduced> {
    let arg = |k: ArgKey| ast.get(k);
    let mut scope: Vec<&Meeting> = corpus.iter().filter(|m| arg(ArgKey::Meeting).is_none_or(|s| m.id == s)).collect();
    if scope.is_empty() && arg(ArgKey::Meeting).is_some() {
        return None;
    }
    scope.sort_by(|a, b| a.id.cmp(&b.id));
    let views: Vec<View> = scope.iter().map(|m| View::new(m)).collect();
    let has_speaker = |s: &str| views.iter().any(|v| v.participants.iter().any(|p| p == s));
    let has_issue = |s: &str| views.iter().any(|v| v.issues().contains(s));
    let has_alt = |a: &str, issue: Option<&str>| views.iter().any(|v| !v.props(a, issue).is_empty());
    let mut out = Reduced::default();

    match ast.template {
        Template::Objections => {
            let alt = arg(ArgKey::Alternative)?;
            let issue = arg(ArgKey::Issue);
            if !has_alt(alt, issue) {
                return None;
            }
            for v in &views {
                let props = v.props(alt, issue);
                for i in v.objections(&props) {
                    out.rows.insert(v.row(i, ""));
                }
            }
        }
        Template::Position => {
            let (s, issue) = (arg(ArgKey::Speaker)?, arg(ArgKey::Issue)?);
            if !has_speaker(s) || !has_issue(issue) {
                return None;
            }
            let (mut pro, mut con) = (0, 0);
            for v in &views {
                for i in 0..v.n() {
                    let relevant = matches!(v.cat[i], Category::Accept | Category::Reject | Category::Propose | Category::Justify);
                    if relevant && v.said_by(i, s) && v.issue_of(i).as_deref() == Some(issue) {
                        let p = v.polarity(i);
                        pro += usize::from(p == "pro");
                        con += usize::from(p == "con");
                        out.rows.insert(v.row(i, p));
                    }
                }
            }
            let stance = if pro + con == 0 {
                "none"
            } else if pro > con {
                "pro"
            } else if con > pro {
                "con"
            } else {
                "mixed"
            };
            out.stance = Some(stance.into());
        }
        Template::Contributions => {
            let (s, alt) = (arg(ArgKey::Speaker)?, arg(ArgKey::Alternative)?);
            let issue = arg(ArgKey::Issue);
            let any = arg(ArgKey::Stance) == Some("any");
            if !has_speaker(s) || !has_alt(alt, issue) {
                return None;
            }
            for v in &views {
                let props = v.props(alt, issue);
                if props.is_empty() {
                    continue;
                }
                for i in 0..v.n() {
                    if !v.said_by(i, s) {
                        continue;
                    }
                    let keep = props.contains(&i)
                        || (v.reaches_any(i, &props)
                            && match v.polarity(i) {
                                "pro" => true,
                                "con" => false,
                                _ => any && matches!(v.cat[i], Category::Ask | Category::Provide | Category::Justify),
                            });
                    if keep {
                        out.rows.insert(v.row(i, ""));
                    }
                }
            }
        }
        Template::Supporters => {
            let s = arg(ArgKey::Speaker)?;
            let issue = arg(ArgKey::Issue);
            if !has_speaker(s) || issue.is_some_and(|i| !has_issue(i)) {
                return None;
            }
            for v in &views {
                let props: Vec<usize> = (0..v.n())
                    .filter(|&p| v.cat[p] == Category::Propose && v.said_by(p, s))
                    .filter(|&p| issue.is_none_or(|i| v.issue_of(p).as_deref() == Some(i)))
                    .collect();
                for i in 0..v.n() {
                    let kind = matches!(v.cat[i], Category::Accept | Category::Justify);
                    if kind && v.polarity(i) == "pro" && !v.said_by(i, s) && v.reaches_any(i, &props) {
                        if let Some(who) = &v.speaker[i] {
                            if v.participants.contains(who) {
                                out.rows.insert(("*".into(), who.clone(), String::new()));
                            }
                        }
                    }
                }
            }
        }
        Template::Rejecters => {
            let s = arg(ArgKey::Speaker)?;
            if !has_speaker(s) {
                return None;
            }
            let mut total = 0;
            let mut covered: BTreeMap<String, usize> = BTreeMap::new();
            for v in &views {
                let props: Vec<usize> = (0..v.n()).filter(|&p| v.cat[p] == Category::Propose && v.said_by(p, s)).collect();
                total += props.len();
                for q in v.participants.iter().filter(|q| *q != s) {
                    let hit = props
                        .iter()
                        .filter(|&&p| (0..v.n()).any(|r| v.cat[r] == Category::Reject && v.said_by(r, q) && v.closure[r][p]))
                        .count();
                    *covered.entry(q.clone()).or_default() += hit;
                }
            }
            for (q, n) in covered {
                if total > 0 && n == total {
                    out.rows.insert(("*".into(), q, String::new()));
                }
            }
        }
        Template::Chosen => {
            let issue = arg(ArgKey::Issue)?;
            if !has_issue(issue) {
                return None;
            }
            for v in &views {
                for d in v.decisions_of_issue(issue) {
                    for a in v.chosen_by(d) {
                        out.rows.insert((v.meeting.clone(), a, String::new()));
                    }
                }
            }
        }
        Template::WhyRejected => {
            let alt = arg(ArgKey::Alternative)?;
            let issue = arg(ArgKey::Issue);
            if !has_alt(alt, issue) {
                return None;
            }
            for v in &views {
                let props = v.props(alt, issue);
                if props.is_empty() {
                    continue;
                }
                let issues: BTreeSet<String> = props.iter().filter_map(|&p| v.issue_of(p)).collect();
                let decisions: BTreeSet<usize> = issues.iter().flat_map(|i| v.decisions_of_issue(i)).collect();
                let chosen: BTreeSet<String> = decisions.iter().flat_map(|&d| v.chosen_by(d)).collect();
                if chosen.contains(alt) {
                    continue;
                }
                let mut eps = v.objections(&props);
                for (c, alts, decs) in v.criteria() {
                    if !alts.is_disjoint(&chosen) || !decs.is_disjoint(&decisions) {
                        eps.insert(c);
                    }
                }
                for i in eps {
                    out.rows.insert(v.row(i, ""));
                }
            }
        }
        Template::OpenIssues => {
            for v in &views {
                for issue in v.issues() {
                    if v.decisions_of_issue(&issue).is_empty() {
                        out.rows.insert((v.meeting.clone(), issue, String::new()));
                    }
                }
            }
        }
        Template::Criteria | Template::DissentCriteria => {
            let reference = arg(ArgKey::Decision)?;
            let (v, d) = views.iter().find_map(|v| v.find_decision(reference).map(|d| (v, d)))?;
            let chosen = v.chosen_by(d);
            let dissent = v.stance_holders(d, Category::Reject);
            for (c, alts, decs) in v.criteria() {
                if alts.is_disjoint(&chosen) && !decs.contains(&d) {
                    continue;
                }
                if ast.template == Template::DissentCriteria && !v.speaker[c].as_ref().is_some_and(|s| dissent.contains(s)) {
                    continue;
                }
                out.rows.insert(v.row(c, v.polarity(c)));
            }
        }
        Template::Contradictions => {
            let s = arg(ArgKey::Speaker);
            let issue = arg(ArgKey::Issue);
            if s.is_some_and(|s| !has_speaker(s)) || issue.is_some_and(|i| !has_issue(i)) {
                return None;
            }
            for v in &views {
                let family = |i: usize| match v.cat[i] {
                    Category::Accept => Some((0, "pro")),
                    Category::Reject => Some((0, "con")),
                    Category::Justify if v.polarity(i) != "neutral" => Some((1, v.polarity(i))),
                    _ => None,
                };
                for a in 0..v.n() {
                    for b in 0..v.n() {
                        let earlier = v.start[a] < v.start[b] || (v.start[a] == v.start[b] && a < b);
                        if !earlier || v.speaker[a].is_none() || v.speaker[a] != v.speaker[b] {
                            continue;
                        }
                        if s.is_some_and(|s| !v.said_by(a, s)) {
                            continue;
                        }
                        let (Some((fa, pa)), Some((fb, pb))) = (family(a), family(b)) else { continue };
                        if fa != fb || pa == pb {
                            continue;
                        }
                        for t in 0..v.n() {
                            let Some(alt) = v.alt_of(t) else { continue };
                            if !v.closure[a][t] {
                                continue;
                            }
                            let both = (0..v.n()).any(|u| v.closure[b][u] && v.alt_of(u).as_deref() == Some(alt.as_str()));
                            let in_issue = issue.is_none_or(|i| {
                                (0..v.n()).any(|u| v.alt_of(u).as_deref() == Some(alt.as_str()) && v.issue_of(u).as_deref() == Some(i))
                            });
                            if both && in_issue {
                                out.rows.insert((v.meeting.clone(), format!("{}>{}", v.id[a], v.id[b]), alt));
                            }
                        }
                    }
                }
            }
        }
        Template::Democratic => {
            let reference = arg(ArgKey::Decision)?;
            let (v, d) = views.iter().find_map(|v| v.find_decision(reference).map(|d| (v, d)))?;
            let accepts = v.stance_holders(d, Category::Accept).len();
            let rejects = v.stance_holders(d, Category::Reject).len();
            let participants = v.participants.len();
            out.judgement = Some((2 * accepts > participants, accepts, rejects, participants));
        }
        Template::Find => panic!("find is served by the index, not the graph oracle"),
    }
    Some(out)
}

/// Reduces an engine answer to the oracle's row form.
pub fn reduce(template: Template, answer: &Answer) -> Reduced {
    let mut out = Reduced::default();
    match &answer.payload {
        Payload::Items(items) => {
            for it in items {
                let row = match template {
                    Template::Supporters | Template::Rejecters => ("*".into(), it.id.clone(), String::new()),
                    Template::Position | Template::Criteria | Template::DissentCriteria => {
                        (it.meeting.to_string(), it.id.clone(), it.detail.clone().unwrap_or_default())
                    }
                    Template::Contradictions => (it.meeting.to_string(), it.id.clone(), it.label.clone()),
                    _ => (it.meeting.to_string(), it.id.clone(), String::new()),
                };
                out.rows.insert(row);
            }
        }
        Payload::Judgement(j) => {
            out.judgement = Some((j.verdict, j.explicit_accepts, j.explicit_rejects, j.participants));
        }
        Payload::DecisionSummaries(_) => {}
    }
    if template == Template::Position {
        out.stance = answer.stance.map(|s| serde_json::to_value(s).expect("stance").as_str().unwrap_or_default().to_owned());
    }
    out
}

/// Every argument combination the templates admit over the entities of
/// a corpus, plus a few unknown ids.
pub fn all_queries(corpus: &[Meeting]) -> Vec<QueryAst> {
    let mut speakers = vec!["Z".to_owned()];
    let mut issues = vec!["I404".to_owned()];
    let mut alts = vec!["P404".to_owned()];
    let mut decisions = vec!["e1".to_owned(), "D404".to_owned()];
    for m in corpus {
        let g = ArgGraph::build(m);
        speakers.extend(g.participants.iter().map(ToString::to_string));
        issues.extend(g.issues().into_iter().map(|(i, _)| i));
        alts.extend(g.alternatives().into_keys());
        for d in g.decisions() {
            decisions.push(g.nodes[d].id.to_string());
            decisions.extend(g.nodes[d].target.clone());
        }
    }
    for v in [&mut speakers, &mut issues, &mut alts, &mut decisions] {
        v.sort();
        v.dedup();
    }
    let mut out = Vec::new();
    let mut push = |t: Template, args: &[(ArgKey, &str)]| {
        out.push(QueryAst { template: t, args: args.iter().map(|(k, v)| (*k, (*v).to_owned())).collect() });
    };
    use ArgKey::*;
    push(Template::OpenIssues, &[]);
    push(Template::Contradictions, &[]);
    for a in &alts {
        push(Template::Objections, &[(Alternative, a)]);
        push(Template::WhyRejected, &[(Alternative, a)]);
        for i in &issues {
            push(Template::Objections, &[(Alternative, a), (Issue, i)]);
            push(Template::WhyRejected, &[(Alternative, a), (Issue, i)]);
        }
    }
    for s in &speakers {
        push(Template::Supporters, &[(Speaker, s)]);
        push(Template::Rejecters, &[(Speaker, s)]);
        push(Template::Contradictions, &[(Speaker, s)]);
        for i in &issues {
            push(Template::Position, &[(Speaker, s), (Issue, i)]);
            push(Template::Supporters, &[(Speaker, s), (Issue, i)]);
            push(Template::Contradictions, &[(Speaker, s), (Issue, i)]);
        }
        for a in &alts {
            push(Template::Contributions, &[(Speaker, s), (Alternative, a)]);
            push(Template::Contributions, &[(Speaker, s), (Alternative, a), (Stance, "any")]);
        }
    }
    for i in &issues {
        push(Template::Chosen, &[(Issue, i)]);
        push(Template::Contradictions, &[(Issue, i)]);
    }
    for d in &decisions {
        push(Template::Criteria, &[(Decision, d)]);
        push(Template::DissentCriteria, &[(Decision, d)]);
        push(Template::Democratic, &[(Decision, d)]);
    }
    out
}

/// Runs [`all_queries`] through the engine and the oracle. Returns, per
/// template, how many queries had a non-empty answer, or the first
/// disagreement.
pub fn check_against_oracle(corpus: &[Meeting]) -> Result<BTreeMap<Template, usize>, String> {
    let index = build_indexes(corpus, &IndexConfig::default(), Execution::Sequential);
    let mut covered = BTreeMap::new();
    for ast in all_queries(corpus) {
        let got = execute(&ast, &index, corpus, &Analyzer::default());
        match (oracle_answer(corpus, &ast), got) {
            (Some(want), Ok(answer)) => {
                let reduced = reduce(ast.template, &answer);
                if reduced != want {
                    return Err(format!("{}: oracle {want:?}, engine {reduced:?}", ast.render()));
                }
                if !want.rows.is_empty() || want.judgement.is_some() {
                    *covered.entry(ast.template).or_insert(0) += 1;
                }
            }
            (None, Err(_)) => {}
            (want, got) => return Err(format!("{}: oracle {want:?}, engine {got:?}", ast.render())),
        }
    }
    Ok(covered)
}
