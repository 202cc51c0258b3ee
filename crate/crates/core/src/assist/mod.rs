//! Semi-automatic annotation support: adjacency-pair detection, issue
//! boundary proposals, latent argumentative labels and episode suggestions.

mod latent;
mod pairs;
mod segment;
mod suggest;

pub use latent::{classify_latent, CueTable, LatentLabel};
pub use pairs::{detect_adjacency_pairs, AdjacencyPair, PairKind, PairPatterns, PairRule};
pub use segment::{propose_issue_boundaries, BoundaryCandidate, BoundaryProposal};
pub use suggest::{
    apply_suggestion, suggest_annotations, suggest_corpus, DensityThreshold, SubSuggestion,
    SuggestConfig, Suggestion,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssistError {
    #[error("{what} line {line}: {message}")]
    Table { what: &'static str, line: usize, message: String },
    #[error("window must be at least one turn")]
    BadWindow,
}
