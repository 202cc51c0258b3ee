//! Shared fixtures and independent reference implementations for the
//! ibismeet test suites. The oracles here are written against the plain
//! data model and deliberately avoid the engine's own traversal code.

pub mod fixtures;
pub mod query_oracle;
pub mod retrieval;
pub mod tfidf;
pub mod validator_oracle;

pub use fixtures::*;
