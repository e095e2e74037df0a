//! Seed-guided topic discovery.
//!
//! Given a corpus and a list of category names (which need not occur in the
//! corpus), finds one ranked, mutually exclusive term set per category by
//! combining vectors from an external pre-trained encoder with embeddings
//! trained on the corpus itself.
//!
//! The flow is [`corpus::load_corpus`] → [`general::load_embedding_file`] →
//! [`pipeline::run`] → [`eval`] metrics.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod general;
pub mod local;
pub mod pipeline;
pub mod topics;
pub mod vectors;

pub use error::{Error, Result};
