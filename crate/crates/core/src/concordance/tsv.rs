//! Mapping exchange format: one mapping per TSV row.
//!
//! ```text
//! start_vocab	start_concept	relation	end_vocab	end_concept	relevance
//! A	hacker	=	B	hacking	high
//! A	isdn device	0	B		none
//! ```
//!
//! An optional seventh `provenance` column marks pivot-derived rows. A Null
//! row may leave `end_vocab` empty when the file maps its start vocabulary to
//! exactly one target.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use thiserror::Error;

use super::{Concordance, Mapping, MappingError, Provenance, RelationType, Relevance};
use crate::kos::{parse_concept, VocabId};

pub const MAPPING_HEADER: &str = "start_vocab\tstart_concept\trelation\tend_vocab\tend_concept\trelevance";
pub const MAPPING_HEADER_WITH_PROVENANCE: &str =
    "start_vocab\tstart_concept\trelation\tend_vocab\tend_concept\trelevance\tprovenance";

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: invariant violation: {source}")]
    InvariantViolation { line: usize, source: MappingError },
    #[error("line {line}: vocabulary {vocab} is not in the registry")]
    UnregisteredVocabulary { line: usize, vocab: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LoadError {
    pub fn line(&self) -> Option<usize> {
        match self {
            LoadError::Parse { line, .. }
            | LoadError::InvariantViolation { line, .. }
            | LoadError::UnregisteredVocabulary { line, .. } => Some(*line),
            LoadError::Io(_) => None,
        }
    }
}

/// A parsed row, mapping already validated.
#[derive(Debug)]
pub(crate) struct Row {
    pub line: usize,
    pub mapping: Mapping,
}

fn parse_err(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Parse {
        line,
        message: message.into(),
    }
}

pub(crate) fn read_rows<R: BufRead>(reader: R) -> Result<Vec<Row>, LoadError> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(parse_err(1, "missing header row")),
    };
    let with_provenance = match header.as_str() {
        MAPPING_HEADER => false,
        MAPPING_HEADER_WITH_PROVENANCE => true,
        other => return Err(parse_err(1, format!("unexpected header {other:?}"))),
    };
    let columns = if with_provenance { 7 } else { 6 };

    let mut rows = Vec::new();
    // Null rows without an end vocabulary, resolved once the file is read.
    let mut open_nulls = Vec::new();
    let mut targets: BTreeMap<VocabId, BTreeSet<VocabId>> = BTreeMap::new();

    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if line.contains('\r') {
            return Err(parse_err(lineno, "stray carriage return in row"));
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != columns {
            return Err(parse_err(
                lineno,
                format!("expected {columns} columns, found {}", cols.len()),
            ));
        }
        let start_vocab = VocabId::new(cols[0]).map_err(|e| parse_err(lineno, e.to_string()))?;
        let start = parse_concept(&start_vocab, cols[1]).map_err(|e| parse_err(lineno, e.to_string()))?;
        let relation: RelationType = cols[2].parse().map_err(|e: MappingError| parse_err(lineno, e.to_string()))?;
        let relevance: Relevance = cols[5].parse().map_err(|e: MappingError| parse_err(lineno, e.to_string()))?;
        let provenance = if with_provenance {
            cols[6].parse().map_err(|e: MappingError| parse_err(lineno, e.to_string()))?
        } else {
            Provenance::Asserted
        };

        let end_vocab_text = cols[3];
        let end_text = cols[4];
        if end_vocab_text.is_empty() {
            if relation != RelationType::Null {
                return Err(LoadError::InvariantViolation {
                    line: lineno,
                    source: MappingError::MissingEnd(relation),
                });
            }
            if !end_text.is_empty() {
                return Err(LoadError::InvariantViolation {
                    line: lineno,
                    source: MappingError::NullWithEnd,
                });
            }
            if relevance != Relevance::None {
                return Err(LoadError::InvariantViolation {
                    line: lineno,
                    source: MappingError::RelevanceMismatch { relation, relevance },
                });
            }
            open_nulls.push((lineno, start, provenance));
            continue;
        }

        let end_vocab = VocabId::new(end_vocab_text).map_err(|e| parse_err(lineno, e.to_string()))?;
        let end = if end_text.is_empty() {
            None
        } else {
            Some(parse_concept(&end_vocab, end_text).map_err(|e| parse_err(lineno, e.to_string()))?)
        };
        let mapping = Mapping::new(start, relation, end_vocab.clone(), end, relevance, provenance)
            .map_err(|source| LoadError::InvariantViolation { line: lineno, source })?;
        targets.entry(start_vocab).or_default().insert(end_vocab);
        rows.push(Row { line: lineno, mapping });
    }

    for (line, start, provenance) in open_nulls {
        let candidates = targets.get(start.vocabulary());
        let target = match candidates {
            Some(set) if set.len() == 1 => set.iter().next().cloned().unwrap(),
            _ => {
                return Err(parse_err(
                    line,
                    format!(
                        "null row without end_vocab: cannot infer the target of {}",
                        start.vocabulary()
                    ),
                ))
            }
        };
        let mapping = Mapping::new(start, RelationType::Null, target, None, Relevance::None, provenance)
            .map_err(|source| LoadError::InvariantViolation { line, source })?;
        rows.push(Row { line, mapping });
    }
    rows.sort_by_key(|r| r.line);
    Ok(rows)
}

/// Writes concordances in the exchange format. The provenance column is
/// emitted only when some mapping is pivot-derived.
pub fn write_tsv<'a>(concordances: impl IntoIterator<Item = &'a Concordance> + Clone) -> String {
    let with_provenance = concordances
        .clone()
        .into_iter()
        .flat_map(|c| c.mappings())
        .any(|m| m.provenance() != Provenance::Asserted);
    let mut out = String::from(if with_provenance {
        MAPPING_HEADER_WITH_PROVENANCE
    } else {
        MAPPING_HEADER
    });
    out.push('\n');
    for c in concordances {
        for m in c.mappings() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}",
                m.source(),
                m.start().display_text(),
                m.relation(),
                m.target(),
                m.end().map(|e| e.display_text()).unwrap_or_default(),
                m.relevance()
            ));
            if with_provenance {
                out.push('\t');
                out.push_str(m.provenance().as_str());
            }
            out.push('\n');
        }
    }
    out
}
