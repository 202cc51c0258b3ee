use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Argumentative-act categories of the Meeting Description Schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    Meeting,
    Opening,
    Agenda,
    Discussion,
    Closing,
    Present,
    Issue,
    Propose,
    Ask,
    Provide,
    Accept,
    Reject,
    Justify,
    Decision,
}

impl Category {
    pub const ALL: [Category; 14] = [
        Category::Meeting,
        Category::Opening,
        Category::Agenda,
        Category::Discussion,
        Category::Closing,
        Category::Present,
        Category::Issue,
        Category::Propose,
        Category::Ask,
        Category::Provide,
        Category::Accept,
        Category::Reject,
        Category::Justify,
        Category::Decision,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Meeting => "MEETING",
            Category::Opening => "OPENING",
            Category::Agenda => "AGENDA",
            Category::Discussion => "DISCUSSION",
            Category::Closing => "CLOSING",
            Category::Present => "PRESENT",
            Category::Issue => "ISSUE",
            Category::Propose => "PROPOSE",
            Category::Ask => "ASK",
            Category::Provide => "PROVIDE",
            Category::Accept => "ACCEPT",
            Category::Reject => "REJECT",
            Category::Justify => "JUSTIFY",
            Category::Decision => "DECISION",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

/// A parameterized argumentative label such as `PROPOSE(alternative)`.
/// `topic` is free text describing what the episode is about and takes no
/// part in grammar matching.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArgLabel {
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
}

impl ArgLabel {
    pub fn new(category: Category) -> Self {
        Self { category, parameter: None, topic: None }
    }

    pub fn with_param(category: Category, parameter: &str) -> Self {
        Self { category, parameter: Some(parameter.to_owned()), topic: None }
    }
}

impl fmt::Display for ArgLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.parameter {
            Some(p) => write!(f, "{}({p})", self.category),
            None => write!(f, "{}", self.category),
        }
    }
}

impl FromStr for ArgLabel {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let pattern: LabelPattern = s.parse()?;
        let parameter = match pattern.parameter {
            ParamPattern::Bare => None,
            ParamPattern::Exact(p) => Some(p),
            ParamPattern::Wildcard => {
                return Err(PatternError {
                    position: s.find('*').unwrap_or(0),
                    message: "a label cannot use the * wildcard".into(),
                })
            }
        };
        Ok(ArgLabel { category: pattern.category, parameter, topic: None })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at offset {position}: {message}")]
pub struct PatternError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParamPattern {
    /// `CATEGORY`: any parameter or none.
    Bare,
    /// `CATEGORY(*)`: same as bare, written explicitly.
    Wildcard,
    Exact(String),
}

/// Label pattern used by grammar rules and event search.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelPattern {
    pub category: Category,
    pub parameter: ParamPattern,
}

impl LabelPattern {
    pub fn category(category: Category) -> Self {
        Self { category, parameter: ParamPattern::Bare }
    }

    pub fn matches(&self, label: &ArgLabel) -> bool {
        if self.category != label.category {
            return false;
        }
        match &self.parameter {
            ParamPattern::Bare | ParamPattern::Wildcard => true,
            ParamPattern::Exact(p) => label.parameter.as_deref() == Some(p.as_str()),
        }
    }
}

impl fmt::Display for LabelPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.parameter {
            ParamPattern::Bare => write!(f, "{}", self.category),
            ParamPattern::Wildcard => write!(f, "{}(*)", self.category),
            ParamPattern::Exact(p) => write!(f, "{}({p})", self.category),
        }
    }
}

pub(crate) fn is_param_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

impl FromStr for LabelPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |position: usize, message: String| PatternError { position, message };
        let cat_end = s
            .find(|c: char| !(c.is_ascii_uppercase() || c == '_'))
            .unwrap_or(s.len());
        if cat_end == 0 {
            return Err(err(0, format!("expected a category name in {s:?}")));
        }
        let category = s[..cat_end].parse::<Category>().map_err(|m| err(0, m))?;
        let rest = &s[cat_end..];
        if rest.is_empty() {
            return Ok(LabelPattern { category, parameter: ParamPattern::Bare });
        }
        if !rest.starts_with('(') {
            return Err(err(cat_end, format!("unexpected {:?}", &rest[..1])));
        }
        let close = rest
            .find(')')
            .ok_or_else(|| err(s.len(), "missing closing parenthesis".into()))?;
        if close + 1 != rest.len() {
            return Err(err(cat_end + close + 1, "trailing characters after ')'".into()));
        }
        let inner = &rest[1..close];
        let parameter = if inner == "*" {
            ParamPattern::Wildcard
        } else if !inner.is_empty() && inner.chars().all(is_param_char) {
            ParamPattern::Exact(inner.to_owned())
        } else {
            return Err(err(cat_end + 1, format!("bad parameter {inner:?}")));
        };
        Ok(LabelPattern { category, parameter })
    }
}

impl Serialize for LabelPattern {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LabelPattern {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_display_and_parse() {
        let l: ArgLabel = "PROPOSE(add_issue)".parse().unwrap();
        assert_eq!(l, ArgLabel::with_param(Category::Propose, "add_issue"));
        assert_eq!(l.to_string(), "PROPOSE(add_issue)");
        assert_eq!("ISSUE".parse::<ArgLabel>().unwrap().to_string(), "ISSUE");
        assert!("ACCEPT(*)".parse::<ArgLabel>().is_err());
    }

    #[test]
    fn pattern_matching() {
        let any: LabelPattern = "ACCEPT(*)".parse().unwrap();
        let bare: LabelPattern = "ACCEPT".parse().unwrap();
        let exact: LabelPattern = "ACCEPT(explanation)".parse().unwrap();
        let plain = ArgLabel::new(Category::Accept);
        let expl = ArgLabel::with_param(Category::Accept, "explanation");
        assert!(any.matches(&plain) && any.matches(&expl));
        assert!(bare.matches(&plain) && bare.matches(&expl));
        assert!(exact.matches(&expl) && !exact.matches(&plain));
        assert!(!exact.matches(&ArgLabel::with_param(Category::Reject, "explanation")));
    }

    #[test]
    fn pattern_errors_carry_positions() {
        assert_eq!("accept".parse::<LabelPattern>().unwrap_err().position, 0);
        assert_eq!("ACCEPT(x".parse::<LabelPattern>().unwrap_err().position, 8);
        assert_eq!("ACCEPT(x)y".parse::<LabelPattern>().unwrap_err().position, 9);
        assert_eq!("ACCEPT( )".parse::<LabelPattern>().unwrap_err().position, 7);
        assert!("FOO".parse::<LabelPattern>().is_err());
    }

    #[test]
    fn pattern_round_trip() {
        for s in ["DECISION", "REJECT(*)", "PROVIDE(clarification)"] {
            assert_eq!(s.parse::<LabelPattern>().unwrap().to_string(), s);
        }
    }
}
