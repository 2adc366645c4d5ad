//! Deterministic synthetic concordance networks for load and scale tests.
//!
//! The default network has 25 vocabularies joined by 30 bilateral and 4
//! unidirectional concordances, 64 directed crosswalks in total. Bulk
//! mappings are dealt round-robin over those crosswalks with exact relation
//! counts.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::concordance::{ConcordanceKey, RelationType, Relevance, MAPPING_HEADER};
use crate::kos::VocabId;

pub const VOCABULARIES: usize = 25;
pub const BILATERAL: usize = 30;
pub const UNIDIRECTIONAL: usize = 4;
pub const KOMOHE_ROWS: usize = 513_000;

/// Relation shares in percent: = 45, 0 12, < 15, > 8, ^ 20.
pub const RELATION_SHARES: [(RelationType, usize); 5] = [
    (RelationType::Equivalence, 45),
    (RelationType::Null, 12),
    (RelationType::Broader, 15),
    (RelationType::Narrower, 8),
    (RelationType::Related, 20),
];

pub fn vocab_id(n: usize) -> VocabId {
    VocabId::new(&format!("V{n:02}")).expect("valid id")
}

/// Directed crosswalks of the default network, bilateral pairs first.
pub fn network() -> Vec<ConcordanceKey> {
    let mut pairs = Vec::new();
    // a hub connected to everyone, as with the most central thesaurus
    for other in 1..VOCABULARIES {
        pairs.push((0, other));
    }
    for n in 1..=BILATERAL - pairs.len() {
        pairs.push((n, n + 1));
    }
    let mut keys = Vec::new();
    for &(a, b) in &pairs {
        keys.push(ConcordanceKey::new(vocab_id(a), vocab_id(b)));
        keys.push(ConcordanceKey::new(vocab_id(b), vocab_id(a)));
    }
    for n in 0..UNIDIRECTIONAL {
        keys.push(ConcordanceKey::new(vocab_id(10 + 2 * n), vocab_id(20 + n)));
    }
    keys
}

/// Exact per-relation row counts for `rows` mappings; rounding leftovers
/// go to Equivalence.
pub fn relation_counts(rows: usize) -> [(RelationType, usize); 5] {
    let mut counts = RELATION_SHARES.map(|(r, pct)| (r, rows * pct / 100));
    let assigned: usize = counts.iter().map(|(_, c)| c).sum();
    counts[0].1 += rows - assigned;
    counts
}

/// Start term of synthetic row `row`; every row has its own start term.
pub fn start_term(row: usize) -> String {
    format!("concept {row}")
}

/// Writes `rows` mappings in the TSV exchange format.
pub fn write_mappings<W: Write>(mut out: W, rows: usize, seed: u64) -> io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut relations: Vec<RelationType> = relation_counts(rows)
        .into_iter()
        .flat_map(|(r, c)| std::iter::repeat_n(r, c))
        .collect();
    relations.shuffle(&mut rng);
    let keys = network();
    writeln!(out, "{MAPPING_HEADER}")?;
    for (row, relation) in relations.into_iter().enumerate() {
        let key = &keys[row % keys.len()];
        let start = start_term(row);
        let (end, relevance) = if relation == RelationType::Null {
            (String::new(), Relevance::None)
        } else {
            let end = if rng.gen_ratio(1, 20) {
                format!("target {row} + aspect {}", rng.gen_range(0..100))
            } else {
                format!("target {row}")
            };
            let relevance = [Relevance::High, Relevance::Medium, Relevance::Low][rng.gen_range(0..3)];
            (end, relevance)
        };
        writeln!(out, "{}\t{start}\t{relation}\t{}\t{end}\t{relevance}", key.source, key.target)?;
    }
    Ok(())
}

pub fn mappings_tsv(rows: usize, seed: u64) -> String {
    let mut buf = Vec::new();
    write_mappings(&mut buf, rows, seed).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8")
}
