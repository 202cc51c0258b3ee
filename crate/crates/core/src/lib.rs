//! Meeting-transcript corpus engine: shallow dialogue structure,
//! argumentative episode annotation with grammar validation, annotation
//! suggestions, segment indexes and a typed query language.

pub mod assist;
pub mod dialogue;
pub mod edit;
pub mod graph;
pub mod ids;
pub mod index;
pub mod mds;
pub mod par;
pub mod query;
pub mod stem;
pub mod store;
pub mod synth;
pub mod text;
pub mod xml;

pub use dialogue::{Meeting, TurnSpan};
pub use ids::{DocumentId, EpisodeId, MeetingId, ParticipantId, TurnId, UtteranceId};
pub use mds::{ArgLabel, Category, GrammarRuleSet, LabelPattern};
pub use par::Execution;
