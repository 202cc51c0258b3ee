//! Command line and HTTP front end over a directory store.

pub mod api;
mod cli;

pub use cli::{run, run_with};
