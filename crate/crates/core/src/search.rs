//! Field-structured inverted index with Boolean matching and tf-idf ranking.
//!
//! Text is tokenized by normalizing it like a controlled term and splitting
//! on every non-alphanumeric character. Each controlled term of a document is
//! indexed as its own segment: phrases never match across two descriptors.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kos::{normalize_term, normalize_text, KosError, Term, VocabId};
use crate::query::Node;

/// Ranked lists are truncated to this many documents.
pub const DEFAULT_CUTOFF: usize = 1000;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("duplicate document id {0:?}")]
    DuplicateDocumentId(String),
    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub abstract_text: String,
    pub controlled_terms: Vec<Term>,
    pub vocabulary: VocabId,
    pub language: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRecord {
    id: String,
    #[serde(default)]
    title: String,
    #[serde(default, rename = "abstract")]
    abstract_text: String,
    #[serde(default)]
    controlled_terms: Vec<String>,
    vocabulary: String,
    language: String,
}

impl Document {
    pub fn new(
        id: &str,
        title: &str,
        abstract_text: &str,
        controlled_terms: &[&str],
        vocabulary: VocabId,
        language: &str,
    ) -> Result<Self, KosError> {
        Ok(Document {
            id: id.to_string(),
            title: title.to_string(),
            abstract_text: abstract_text.to_string(),
            controlled_terms: controlled_terms
                .iter()
                .map(|t| normalize_term(t))
                .collect::<Result<_, _>>()?,
            vocabulary,
            language: language.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "id": self.id,
            "title": self.title,
            "abstract": self.abstract_text,
            "controlled_terms": self.controlled_terms.iter().map(Term::raw).collect::<Vec<_>>(),
            "vocabulary": self.vocabulary,
            "language": self.language,
        })
        .to_string()
    }
}

/// Reads a JSON Lines corpus; blank lines are skipped.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<Document>, SearchError> {
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| SearchError::Corpus { line: idx + 1, message };
        let rec: DocumentRecord = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        let terms: Vec<&str> = rec.controlled_terms.iter().map(String::as_str).collect();
        let vocabulary = VocabId::new(&rec.vocabulary).map_err(|e| err(e.to_string()))?;
        docs.push(
            Document::new(&rec.id, &rec.title, &rec.abstract_text, &terms, vocabulary, &rec.language)
                .map_err(|e| err(e.to_string()))?,
        );
    }
    Ok(docs)
}

pub fn tokenize(text: &str) -> Vec<String> {
    normalize_text(text)
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldScope {
    /// Controlled-term field only.
    ControlledOnly,
    /// Title, abstract and controlled terms.
    FreeText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Field {
    Title,
    Abstract,
    Controlled,
}

impl FieldScope {
    fn includes(self, field: Field) -> bool {
        match self {
            FieldScope::ControlledOnly => field == Field::Controlled,
            FieldScope::FreeText => true,
        }
    }
}

#[derive(Debug, Clone)]
struct Posting {
    doc: u32,
    field: Field,
    positions: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    pub doc_id: String,
    pub score: f64,
}

/// Hits ordered by score (descending) then document id (ascending).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedList {
    pub query_id: String,
    pub hits: Vec<Hit>,
}

impl RankedList {
    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.hits.iter().map(|h| h.doc_id.as_str())
    }

    /// TREC run format: `query_id Q0 doc_id rank score run_name`.
    pub fn to_trec(&self, run_name: &str) -> String {
        self.hits
            .iter()
            .enumerate()
            .map(|(i, h)| format!("{} Q0 {} {} {:.6} {}\n", self.query_id, h.doc_id, i + 1, h.score, run_name))
            .collect()
    }
}

/// Frozen inverted index over one corpus.
#[derive(Debug, Clone, Default)]
pub struct Index {
    doc_ids: Vec<String>,
    postings: HashMap<String, Vec<Posting>>,
}

type LeafMatches = BTreeMap<u32, u32>;

impl Index {
    pub fn build<'a>(documents: impl IntoIterator<Item = &'a Document>) -> Result<Index, SearchError> {
        let mut index = Index::default();
        let mut seen = HashSet::new();
        for doc in documents {
            if !seen.insert(doc.id.clone()) {
                return Err(SearchError::DuplicateDocumentId(doc.id.clone()));
            }
            let n = index.doc_ids.len() as u32;
            index.doc_ids.push(doc.id.clone());
            index.add_field(n, Field::Title, std::iter::once(tokenize(&doc.title)));
            index.add_field(n, Field::Abstract, std::iter::once(tokenize(&doc.abstract_text)));
            index.add_field(
                n,
                Field::Controlled,
                doc.controlled_terms.iter().map(|t| tokenize(t.normalized())),
            );
        }
        Ok(index)
    }

    fn add_field(&mut self, doc: u32, field: Field, segments: impl Iterator<Item = Vec<String>>) {
        let mut local: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        let mut pos = 0u32;
        for segment in segments {
            for token in segment {
                local.entry(token).or_default().push(pos);
                pos += 1;
            }
            pos += 1;
        }
        for (token, positions) in local {
            self.postings.entry(token).or_default().push(Posting { doc, field, positions });
        }
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn distinct_tokens(&self) -> usize {
        self.postings.len()
    }

    /// Ids of documents containing `token` in any field.
    pub fn posting_docs(&self, token: &str) -> Vec<&str> {
        let docs: BTreeSet<u32> = self.postings.get(token).into_iter().flatten().map(|p| p.doc).collect();
        docs.into_iter().map(|d| self.doc_ids[d as usize].as_str()).collect()
    }

    fn posting(&self, token: &str, doc: u32, field: Field) -> Option<&Posting> {
        let list = self.postings.get(token)?;
        list.binary_search_by(|p| (p.doc, p.field).cmp(&(doc, field)))
            .ok()
            .map(|i| &list[i])
    }

    /// Documents matching a leaf, with the number of occurrences in scope.
    fn leaf_matches(&self, term: &Term, scope: FieldScope) -> LeafMatches {
        let tokens = tokenize(term.normalized());
        let mut out = LeafMatches::new();
        let Some(first) = tokens.first().and_then(|t| self.postings.get(t)) else {
            return out;
        };
        for p in first.iter().filter(|p| scope.includes(p.field)) {
            let rest: Option<Vec<&Posting>> = tokens[1..]
                .iter()
                .map(|t| self.posting(t, p.doc, p.field))
                .collect();
            let Some(rest) = rest else { continue };
            let count = p
                .positions
                .iter()
                .filter(|&&start| {
                    rest.iter()
                        .enumerate()
                        .all(|(i, q)| q.positions.binary_search(&(start + 1 + i as u32)).is_ok())
                })
                .count() as u32;
            if count > 0 {
                *out.entry(p.doc).or_default() += count;
            }
        }
        out
    }

    fn evaluate(&self, node: &Node, leaves: &[LeafMatches], next: &mut usize) -> BTreeSet<u32> {
        match node {
            Node::Term(_) | Node::Phrase(_) => {
                let set = leaves[*next].keys().copied().collect();
                *next += 1;
                set
            }
            Node::And(children) => {
                let mut sets = children.iter().map(|c| self.evaluate(c, leaves, next)).collect::<Vec<_>>().into_iter();
                let first = sets.next().unwrap_or_default();
                sets.fold(first, |acc, s| acc.intersection(&s).copied().collect())
            }
            Node::Or(children) => children
                .iter()
                .flat_map(|c| self.evaluate(c, leaves, next))
                .collect(),
        }
    }

    fn matching(&self, query: &Node, scope: FieldScope) -> (Vec<LeafMatches>, BTreeSet<u32>) {
        let leaves: Vec<LeafMatches> = query.leaves().into_iter().map(|t| self.leaf_matches(t, scope)).collect();
        let set = self.evaluate(query, &leaves, &mut 0);
        (leaves, set)
    }

    /// Unranked Boolean match set as document ids.
    pub fn matches(&self, query: &Node, scope: FieldScope) -> BTreeSet<String> {
        let (_, set) = self.matching(query, scope);
        set.into_iter().map(|d| self.doc_ids[d as usize].clone()).collect()
    }

    /// Boolean retrieval ranked by the sum over matching leaves of
    /// `tf * ln(1 + N / df)`, truncated at `cutoff`.
    pub fn search(&self, query_id: &str, query: &Node, scope: FieldScope, cutoff: usize) -> RankedList {
        let (leaves, set) = self.matching(query, scope);
        let n = self.doc_ids.len() as f64;
        let idf: Vec<f64> = leaves
            .iter()
            .map(|l| if l.is_empty() { 0.0 } else { (1.0 + n / l.len() as f64).ln() })
            .collect();
        let mut hits: Vec<Hit> = set
            .into_iter()
            .map(|doc| {
                let score = leaves
                    .iter()
                    .zip(&idf)
                    .filter_map(|(l, w)| l.get(&doc).map(|&tf| tf as f64 * w))
                    .sum();
                Hit {
                    doc_id: self.doc_ids[doc as usize].clone(),
                    score,
                }
            })
            .collect();
        hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.doc_id.cmp(&b.doc_id)));
        hits.truncate(cutoff);
        RankedList {
            query_id: query_id.to_string(),
            hits,
        }
    }
}
