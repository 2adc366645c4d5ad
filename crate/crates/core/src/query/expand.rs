//! The two expansion modes.
//!
//! * append: every leaf `L` becomes `L OR e1 OR ... OR ek` over its
//!   equivalents in all concordances.
//! * replace: every leaf is replaced by its equivalents in one concordance.
//!
//! Both rewrite leaves independently; the operator structure above the
//! leaves is left untouched. Only Equivalence relations are used.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{BooleanQuery, Node};
use crate::concordance::{ConcordanceKey, MappingFilter, RelationType, Store};
use crate::kos::{Concept, ConceptKey, Term, VocabId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("unknown concordance {0}")]
    UnknownConcordance(String),
    #[error("query terms come from {query}, but concordance {concordance} starts elsewhere")]
    WrongConcordance { query: VocabId, concordance: ConcordanceKey },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutedConcept {
    pub concept: Concept,
    pub concordance: ConcordanceKey,
    pub relation: RelationType,
}

/// What happened to one original leaf term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub term: Term,
    /// Concepts added next to (append) or in place of (replace) the term.
    pub concepts: Vec<SubstitutedConcept>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionResult {
    pub query: BooleanQuery,
    pub substitutions: Vec<Substitution>,
    /// Leaf terms left unchanged, in first-occurrence order.
    pub untranslated: Vec<Term>,
}

#[derive(Debug, Clone, Default)]
pub struct AppendOptions {
    /// Only follow concordances starting in this vocabulary.
    pub source: Option<VocabId>,
    /// Only add concepts from these vocabularies.
    pub targets: Option<Vec<VocabId>>,
}

struct Rewriter {
    substitutions: Vec<Substitution>,
    untranslated: Vec<Term>,
    seen_substituted: BTreeSet<Term>,
}

impl Rewriter {
    fn new() -> Self {
        Rewriter {
            substitutions: Vec::new(),
            untranslated: Vec::new(),
            seen_substituted: BTreeSet::new(),
        }
    }

    fn rewrite(&mut self, node: &Node, leaf_fn: &mut dyn FnMut(&Term) -> Option<(Node, Vec<SubstitutedConcept>)>) -> Node {
        match node {
            Node::Term(t) | Node::Phrase(t) => match leaf_fn(t) {
                Some((replacement, concepts)) => {
                    if self.seen_substituted.insert(t.clone()) {
                        self.substitutions.push(Substitution {
                            term: t.clone(),
                            concepts,
                        });
                    }
                    replacement
                }
                None => {
                    if !self.untranslated.contains(t) {
                        self.untranslated.push(t.clone());
                    }
                    node.clone()
                }
            },
            Node::And(c) => Node::And(c.iter().map(|n| self.rewrite(n, leaf_fn)).collect()),
            Node::Or(c) => Node::Or(c.iter().map(|n| self.rewrite(n, leaf_fn)).collect()),
        }
    }

    fn finish(self, query: BooleanQuery) -> ExpansionResult {
        ExpansionResult {
            query,
            substitutions: self.substitutions,
            untranslated: self.untranslated,
        }
    }
}

/// Distinct concept nodes, skipping any equal to `original`.
fn distinct_nodes(original: Option<&Node>, concepts: &[SubstitutedConcept]) -> (Vec<Node>, Vec<SubstitutedConcept>) {
    let mut nodes: Vec<Node> = Vec::new();
    let mut kept = Vec::new();
    for sc in concepts {
        let node = Node::concept(&sc.concept);
        let key = node.normalized();
        if original.is_some_and(|o| *o == key) || nodes.iter().any(|n| n.normalized() == key) {
            continue;
        }
        nodes.push(node);
        kept.push(sc.clone());
    }
    (nodes, kept)
}

/// Appends every equivalent concept to its leaf: `L` becomes `Or(L, e1..ek)`.
pub fn expand_append(query: &BooleanQuery, store: &Store, options: &AppendOptions) -> ExpansionResult {
    let mut rewriter = Rewriter::new();
    let mut leaf_fn = |term: &Term| {
        let found: Vec<SubstitutedConcept> = store
            .equivalents_in(term, options.source.as_ref(), options.targets.as_deref())
            .into_iter()
            .map(|e| SubstitutedConcept {
                concept: e.concept.clone(),
                concordance: e.concordance.clone(),
                relation: RelationType::Equivalence,
            })
            .collect();
        let original = Node::leaf(term.clone());
        let (nodes, kept) = distinct_nodes(Some(&original), &found);
        if nodes.is_empty() {
            return None;
        }
        let mut children = vec![original];
        children.extend(nodes);
        Some((Node::Or(children), kept))
    };
    let root = rewriter.rewrite(&query.root, &mut leaf_fn);
    rewriter.finish(BooleanQuery {
        root,
        vocabulary: query.vocabulary.clone(),
    })
}

/// Replaces every leaf by its Equivalence targets in `concordance`; leaves
/// without one (including Null-mapped leaves) are kept verbatim.
pub fn translate_replace(
    query: &BooleanQuery,
    store: &Store,
    concordance: &ConcordanceKey,
) -> Result<ExpansionResult, ExpandError> {
    if store.concordance(concordance).is_none() {
        return Err(ExpandError::UnknownConcordance(concordance.to_string()));
    }
    if let Some(vocab) = &query.vocabulary {
        if *vocab != concordance.source {
            return Err(ExpandError::WrongConcordance {
                query: vocab.clone(),
                concordance: concordance.clone(),
            });
        }
    }
    let filter = MappingFilter::default()
        .target(concordance.target.clone())
        .relations([RelationType::Equivalence]);
    let mut rewriter = Rewriter::new();
    let mut leaf_fn = |term: &Term| {
        let found: Vec<SubstitutedConcept> = store
            .query_mappings(concordance.source.as_str(), &ConceptKey::single(term), &filter)
            .expect("concordance vocabularies are known")
            .into_iter()
            .filter_map(|m| {
                Some(SubstitutedConcept {
                    concept: m.end()?.clone(),
                    concordance: concordance.clone(),
                    relation: m.relation(),
                })
            })
            .collect();
        let (nodes, kept) = distinct_nodes(None, &found);
        if nodes.is_empty() {
            return None;
        }
        Some((Node::or(nodes), kept))
    };
    let root = rewriter.rewrite(&query.root, &mut leaf_fn);
    Ok(rewriter.finish(BooleanQuery {
        root,
        vocabulary: Some(concordance.target.clone()),
    }))
}
