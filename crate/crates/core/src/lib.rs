//! Caption-corpus fairness toolkit.
//!
//! Gender-lexicon analysis of MSCOCO-style captions, Confident / Human /
//! Nature evaluation splits, gender neutralization and recombination of
//! captions, corpus-level caption metrics and gender co-occurrence reports.

pub mod bias;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod lexicon;
pub mod metrics;
pub mod report;
pub mod splitter;
pub mod transform;

pub use error::{Error, Result};
