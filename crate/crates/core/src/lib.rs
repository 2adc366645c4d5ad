//! Cross-concordances between controlled vocabularies: storage, Boolean
//! query expansion, a small deterministic search engine and an IR
//! evaluation harness comparing search scenarios with and without mappings.

pub mod concordance;
pub mod eval;
pub mod kos;
pub mod query;
pub mod search;
pub mod synth;
