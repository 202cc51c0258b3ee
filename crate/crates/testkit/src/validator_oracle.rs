//! Exhaustive grammar check: every episode against every child and
//! parameter rule, every reply-to edge against every reply rule. Labels
//! and patterns are compared as rendered strings.

use std::collections::BTreeSet;

use ibismeet_core::mds::GrammarRuleSet;
use ibismeet_core::Meeting;

pub type ViolationKey = (String, String, Option<String>);

fn pattern_matches(pattern: &str, label: &str) -> bool {
    let (pcat, pparam) = split(pattern);
    let (lcat, lparam) = split(label);
    if pcat != lcat {
        return false;
    }
    match pparam {
        None | Some("*") => true,
        Some(p) => lparam == Some(p),
    }
}

fn split(s: &str) -> (&str, Option<&str>) {
    match s.find('(') {
        Some(i) => (&s[..i], Some(&s[i + 1..s.len() - 1])),
        None => (s, None),
    }
}

/// Violation set as `(code, episode, related)` triples.
pub fn brute_force_violations(meeting: &Meeting, grammar: &GrammarRuleSet) -> BTreeSet<ViolationKey> {
    let mut out = BTreeSet::new();
    let children: Vec<(String, String)> =
        grammar.child_rules.iter().map(|(p, c)| (p.to_string(), c.to_string())).collect();
    let replies: Vec<(String, String)> =
        grammar.reply_rules.iter().map(|(r, a)| (r.to_string(), a.to_string())).collect();
    let find = |id: &str| meeting.episodes.iter().find(|e| e.id == id);

    for ep in &meeting.episodes {
        let label = ep.label.to_string();
        let id = ep.id.to_string();
        if let Some(param) = &ep.label.parameter {
            let mut declared = false;
            for (cat, names) in &grammar.params {
                for n in names {
                    if *cat == ep.label.category && n == param {
                        declared = true;
                    }
                }
            }
            if !declared {
                out.insert(("PARAM_UNKNOWN".into(), id.clone(), None));
            }
        }
        if ep.children.is_empty() && ep.turn_span.is_none() {
            out.insert(("EMPTY_EPISODE".into(), id.clone(), None));
        }
        let Some(parent) = ep.parent.as_ref().and_then(|p| find(p.as_str())) else { continue };
        let parent_label = parent.label.to_string();
        let mut licensed = false;
        for (p, c) in &children {
            if pattern_matches(p, &parent_label) && pattern_matches(c, &label) {
                licensed = true;
            }
        }
        if !licensed {
            out.insert(("CHILD_UNLICENSED".into(), id.clone(), Some(parent.id.to_string())));
        }
        let mut contained = ep.start >= parent.start && ep.end <= parent.end;
        if let (Some(ps), Some(cs)) = (parent.turn_span, ep.turn_span) {
            for t in cs.first..=cs.last {
                if t < ps.first || t > ps.last {
                    contained = false;
                }
            }
        }
        if !contained {
            out.insert(("TEMPORAL_CONTAINMENT".into(), id.clone(), Some(parent.id.to_string())));
        }
    }

    for edge in &meeting.reply_to {
        let Some(source) = find(edge.from.as_str()) else { continue };
        for t in &edge.to {
            let Some(target) = find(t.as_str()) else { continue };
            let related = Some(target.id.to_string());
            if target.start.partial_cmp(&source.start) != Some(std::cmp::Ordering::Less) {
                out.insert(("REPLY_NOT_EARLIER".into(), source.id.to_string(), related.clone()));
            }
            let (sl, tl) = (source.label.to_string(), target.label.to_string());
            let mut licensed = false;
            for (r, a) in &replies {
                if pattern_matches(r, &sl) && pattern_matches(a, &tl) {
                    licensed = true;
                }
            }
            if !licensed {
                out.insert(("REPLY_UNLICENSED".into(), source.id.to_string(), related));
            }
        }
    }
    out
}
