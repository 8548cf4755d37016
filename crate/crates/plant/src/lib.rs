//! Concreteness-aware hard-negative curation.
//!
//! [`lexicon`] loads concreteness ratings, [`plant`] picks one keyword per
//! image caption, and [`genio`] turns selections into perturbed captions
//! and edited-image references through pluggable clients.

pub mod corpus;
pub mod error;
pub mod genio;
pub mod jsonl;
pub mod lexicon;
pub mod plant;
pub mod tagger;

pub use error::{Error, Result};
