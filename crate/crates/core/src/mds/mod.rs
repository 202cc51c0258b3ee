//! The Meeting Description Schema: argumentative labels, the episode tree,
//! the reply-to relation and the dependency-grammar validator.

mod grammar;
mod label;
mod tree;
mod validate;

pub use grammar::{GrammarError, GrammarRuleSet};
pub use label::{ArgLabel, Category, LabelPattern, ParamPattern, PatternError};
pub use tree::{EditError, Episode, EpisodeSpec, ReplyToEdge};
pub use validate::{validate, validate_corpus, ValidationReport, Violation, ViolationCode};
