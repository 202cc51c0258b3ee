use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::label::{is_param_char, ArgLabel, Category, LabelPattern};

const DEFAULT_GRAMMAR: &str = include_str!("../../data/mds-default.grammar");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("grammar line {line}: {message}")]
pub struct GrammarError {
    pub line: usize,
    pub message: String,
}

/// Licensing table of the argumentation dependency grammar: which children
/// a label admits, which antecedents a label may reply to, and which
/// parameters each category accepts.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GrammarRuleSet {
    pub params: BTreeMap<Category, Vec<String>>,
    pub child_rules: Vec<(LabelPattern, LabelPattern)>,
    pub reply_rules: Vec<(LabelPattern, LabelPattern)>,
    #[serde(default)]
    pub exclusive: Vec<LabelPattern>,
}

impl GrammarRuleSet {
    /// The bundled reconstruction of the schema's episode structure.
    pub fn default_mds() -> Self {
        Self::parse(DEFAULT_GRAMMAR).expect("bundled grammar parses")
    }

    pub fn parse(text: &str) -> Result<Self, GrammarError> {
        let mut g = GrammarRuleSet::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| GrammarError { line, message };
            let pattern = |s: &str| s.parse::<LabelPattern>().map_err(|e| err(e.to_string()));
            let words: Vec<&str> = content.split_whitespace().collect();
            match words.as_slice() {
                ["child", parent, child] => {
                    push_unique(&mut g.child_rules, (pattern(parent)?, pattern(child)?))
                }
                ["reply", replier, antecedent] => {
                    push_unique(&mut g.reply_rules, (pattern(replier)?, pattern(antecedent)?))
                }
                ["exclusive", parent] => push_unique(&mut g.exclusive, pattern(parent)?),
                ["params", category, names @ ..] => {
                    let category: Category = category.parse().map_err(err)?;
                    let entry = g.params.entry(category).or_default();
                    for name in names {
                        if !name.chars().all(is_param_char) {
                            return Err(err(format!("bad parameter name {name:?}")));
                        }
                        if !entry.iter().any(|n| n == name) {
                            entry.push((*name).to_owned());
                        }
                    }
                }
                [keyword, ..] => {
                    return Err(err(format!("unknown directive or arity for {keyword:?}")))
                }
                [] => unreachable!("empty lines skipped"),
            }
        }
        Ok(g)
    }

    /// Writes the rule set back in the line-oriented grammar format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (category, names) in &self.params {
            let _ = writeln!(out, "params {category} {}", names.join(" "));
        }
        for (p, c) in &self.child_rules {
            let _ = writeln!(out, "child {p} {c}");
        }
        for (r, a) in &self.reply_rules {
            let _ = writeln!(out, "reply {r} {a}");
        }
        for p in &self.exclusive {
            let _ = writeln!(out, "exclusive {p}");
        }
        out
    }

    pub fn licenses_child(&self, parent: &ArgLabel, child: &ArgLabel) -> bool {
        self.child_rules
            .iter()
            .any(|(p, c)| p.matches(parent) && c.matches(child))
    }

    pub fn licenses_reply(&self, replier: &ArgLabel, antecedent: &ArgLabel) -> bool {
        self.reply_rules
            .iter()
            .any(|(r, a)| r.matches(replier) && a.matches(antecedent))
    }

    pub fn is_exclusive(&self, parent: &ArgLabel) -> bool {
        self.exclusive.iter().any(|p| p.matches(parent))
    }

    /// An absent parameter is always allowed; a present one must be declared
    /// for its category.
    pub fn knows_parameter(&self, label: &ArgLabel) -> bool {
        match &label.parameter {
            None => true,
            Some(p) => self
                .params
                .get(&label.category)
                .is_some_and(|names| names.iter().any(|n| n == p)),
        }
    }

    /// Labels the grammar admits directly under `parent`, with wildcard
    /// parameters expanded to the declared parameter set.
    pub fn licensed_children(&self, parent: &ArgLabel) -> Vec<ArgLabel> {
        let mut out: Vec<ArgLabel> = Vec::new();
        for (p, c) in &self.child_rules {
            if !p.matches(parent) {
                continue;
            }
            let candidates = match &c.parameter {
                super::ParamPattern::Exact(name) => vec![ArgLabel::with_param(c.category, name)],
                _ => {
                    let mut v = vec![ArgLabel::new(c.category)];
                    for name in self.params.get(&c.category).into_iter().flatten() {
                        v.push(ArgLabel::with_param(c.category, name));
                    }
                    v
                }
            };
            for label in candidates {
                if !out.contains(&label) {
                    out.push(label);
                }
            }
        }
        out
    }
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, item: T) {
    if !v.contains(&item) {
        v.push(item);
    }
}
