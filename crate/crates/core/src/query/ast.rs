use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::QueryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    Objections,
    Position,
    Contributions,
    Supporters,
    Rejecters,
    Chosen,
    WhyRejected,
    OpenIssues,
    Criteria,
    DissentCriteria,
    Contradictions,
    Democratic,
    Find,
}

/// Argument keys, declared in canonical render order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgKey {
    Speaker,
    Issue,
    Alternative,
    Decision,
    Meeting,
    Stance,
    Terms,
    Granularity,
}

impl ArgKey {
    pub const ALL: [ArgKey; 8] = [
        ArgKey::Speaker,
        ArgKey::Issue,
        ArgKey::Alternative,
        ArgKey::Decision,
        ArgKey::Meeting,
        ArgKey::Stance,
        ArgKey::Terms,
        ArgKey::Granularity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ArgKey::Speaker => "speaker",
            ArgKey::Issue => "issue",
            ArgKey::Alternative => "alternative",
            ArgKey::Decision => "decision",
            ArgKey::Meeting => "meeting",
            ArgKey::Stance => "stance",
            ArgKey::Terms => "terms",
            ArgKey::Granularity => "granularity",
        }
    }
}

impl Template {
    pub const ALL: [Template; 13] = [
        Template::Objections,
        Template::Position,
        Template::Contributions,
        Template::Supporters,
        Template::Rejecters,
        Template::Chosen,
        Template::WhyRejected,
        Template::OpenIssues,
        Template::Criteria,
        Template::DissentCriteria,
        Template::Contradictions,
        Template::Democratic,
        Template::Find,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Template::Objections => "objections",
            Template::Position => "position",
            Template::Contributions => "contributions",
            Template::Supporters => "supporters",
            Template::Rejecters => "rejecters",
            Template::Chosen => "chosen",
            Template::WhyRejected => "why_rejected",
            Template::OpenIssues => "open_issues",
            Template::Criteria => "criteria",
            Template::DissentCriteria => "dissent_criteria",
            Template::Contradictions => "contradictions",
            Template::Democratic => "democratic",
            Template::Find => "find",
        }
    }

    /// (required, optional) argument keys.
    pub fn signature(self) -> (&'static [ArgKey], &'static [ArgKey]) {
        use ArgKey::*;
        match self {
            Template::Objections => (&[Alternative], &[Meeting, Issue]),
            Template::Position => (&[Speaker, Issue], &[Meeting]),
            Template::Contributions => (&[Speaker, Alternative], &[Issue, Stance, Meeting]),
            Template::Supporters => (&[Speaker], &[Meeting, Issue]),
            Template::Rejecters => (&[Speaker], &[Meeting]),
            Template::Chosen => (&[Issue], &[Meeting]),
            Template::WhyRejected => (&[Alternative], &[Issue, Meeting]),
            Template::OpenIssues => (&[], &[Meeting]),
            Template::Criteria => (&[Decision], &[Meeting]),
            Template::DissentCriteria => (&[Decision], &[Meeting]),
            Template::Contradictions => (&[], &[Speaker, Issue, Meeting]),
            Template::Democratic => (&[Decision], &[Meeting]),
            Template::Find => (&[Terms], &[Meeting, Granularity]),
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryAst {
    pub template: Template,
    pub args: BTreeMap<ArgKey, String>,
}

impl QueryAst {
    pub fn get(&self, key: ArgKey) -> Option<&str> {
        self.args.get(&key).map(String::as_str)
    }

    /// Canonical text: arguments in key order, values double-quoted.
    pub fn render(&self) -> String {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|(k, v)| {
                let escaped = v.replace('\\', "\\\\").replace('"', "\\\"");
                format!("{}=\"{escaped}\"", k.as_str())
            })
            .collect();
        format!("{}({})", self.template, args.join(", "))
    }
}

impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for QueryAst {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_query(s)
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Syntax { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), QueryError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn ident(&mut self) -> (usize, &'a str) {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..]
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.src.len() - start);
        self.pos += len;
        (start, &self.src[start..start + len])
    }

    fn quoted(&mut self) -> Result<String, QueryError> {
        self.skip_ws();
        if self.peek() != Some('"') {
            return self.err("expected a double-quoted value");
        }
        let open = self.pos;
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.src[self.pos..].char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e @ ('"' | '\\'))) => out.push(e),
                    Some((j, _)) => {
                        self.pos += j;
                        return self.err("only \\\" and \\\\ escapes are allowed");
                    }
                    None => break,
                },
                c => out.push(c),
            }
        }
        self.pos = open;
        self.err("unterminated string")
    }
}

pub fn parse_query(text: &str) -> Result<QueryAst, QueryError> {
    let mut cur = Cursor { src: text, pos: 0 };
    let (tpos, name) = cur.ident();
    if name.is_empty() {
        return cur.err("expected a template name");
    }
    let Some(template) = Template::ALL.into_iter().find(|t| t.as_str() == name) else {
        return Err(QueryError::Syntax { position: tpos, message: format!("unknown template {name:?}") });
    };
    cur.expect('(')?;
    let (required, optional) = template.signature();
    let mut args = BTreeMap::new();
    cur.skip_ws();
    if cur.peek() == Some(')') {
        cur.pos += 1;
    } else {
        loop {
            let (kpos, key) = cur.ident();
            if key.is_empty() {
                return cur.err("expected an argument name");
            }
            let Some(k) = ArgKey::ALL.into_iter().find(|k| k.as_str() == key) else {
                return Err(QueryError::Syntax { position: kpos, message: format!("unknown argument {key:?}") });
            };
            if !required.contains(&k) && !optional.contains(&k) {
                return Err(QueryError::Syntax {
                    position: kpos,
                    message: format!("{template} does not take argument {key:?}"),
                });
            }
            cur.expect('=')?;
            let vpos = cur.pos;
            let value = cur.quoted()?;
            if let Some(msg) = check_value(k, &value) {
                return Err(QueryError::Syntax { position: vpos, message: msg });
            }
            if args.insert(k, value).is_some() {
                return Err(QueryError::Syntax { position: kpos, message: format!("argument {key:?} given twice") });
            }
            cur.skip_ws();
            match cur.peek() {
                Some(',') => cur.pos += 1,
                Some(')') => {
                    cur.pos += 1;
                    break;
                }
                _ => return cur.err("expected ',' or ')'"),
            }
        }
    }
    cur.skip_ws();
    if cur.pos != text.len() {
        return cur.err("unexpected text after the query");
    }
    if let Some(missing) = required.iter().find(|k| !args.contains_key(k)) {
        return Err(QueryError::MissingArgument(missing.as_str()));
    }
    Ok(QueryAst { template, args })
}

fn check_value(key: ArgKey, value: &str) -> Option<String> {
    match key {
        ArgKey::Stance if !matches!(value, "pro" | "any") => {
            Some(format!("stance must be \"pro\" or \"any\", not {value:?}"))
        }
        ArgKey::Granularity if value.parse::<crate::index::Granularity>().is_err() => {
            Some(format!("unknown granularity {value:?}"))
        }
        ArgKey::Terms => None,
        _ if value.trim().is_empty() => Some(format!("{} must not be empty", key.as_str())),
        _ => None,
    }
}
