//! Heterogeneity service: HTTP lookup and query expansion over a frozen
//! concordance store, plus the `crosswalk` command line.

pub mod cli;
pub mod config;
pub mod service;
