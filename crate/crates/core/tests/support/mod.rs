//! Test-side oracles and random instance generators, shared with the
//! acceptance suite of the service crate.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use crosswalk_core::concordance::{Concordance, ConcordanceKey, Mapping, Provenance, RelationType, Relevance, Store};
use crosswalk_core::eval::{Qrels, Topic};
use crosswalk_core::kos::{parse_concept, VocabId};
use crosswalk_core::query::Node;
use crosswalk_core::search::{tokenize, Document, FieldScope, RankedList};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(path)
}

pub fn fixture_text(path: &str) -> String {
    std::fs::read_to_string(fixture(path)).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn vid(s: &str) -> VocabId {
    VocabId::new(s).unwrap()
}

// ---------------------------------------------------------------- search

/// Token segments of a document within a scope; a phrase must fit inside
/// one segment.
fn segments(doc: &Document, scope: FieldScope) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = doc.controlled_terms.iter().map(|t| tokenize(t.normalized())).collect();
    if scope == FieldScope::FreeText {
        out.push(tokenize(&doc.title));
        out.push(tokenize(&doc.abstract_text));
    }
    out
}

/// Occurrences of a leaf in a document, by scanning every segment.
pub fn oracle_tf(doc: &Document, leaf: &str, scope: FieldScope) -> usize {
    let needle = tokenize(leaf);
    if needle.is_empty() {
        return 0;
    }
    segments(doc, scope)
        .iter()
        .map(|seg| seg.windows(needle.len()).filter(|w| *w == needle.as_slice()).count())
        .sum()
}

pub fn oracle_leaf_set(docs: &[Document], leaf: &str, scope: FieldScope) -> BTreeSet<String> {
    docs.iter()
        .filter(|d| oracle_tf(d, leaf, scope) > 0)
        .map(|d| d.id.clone())
        .collect()
}

/// Set algebra over leaf match sets.
pub fn oracle_matches(docs: &[Document], node: &Node, scope: FieldScope) -> BTreeSet<String> {
    match node {
        Node::Term(t) | Node::Phrase(t) => oracle_leaf_set(docs, t.normalized(), scope),
        Node::And(c) => {
            let mut sets = c.iter().map(|n| oracle_matches(docs, n, scope));
            let first = sets.next().unwrap_or_default();
            sets.fold(first, |a, s| a.intersection(&s).cloned().collect())
        }
        Node::Or(c) => c.iter().flat_map(|n| oracle_matches(docs, n, scope)).collect(),
    }
}

/// Brute-force ranking: tf * ln(1 + N/df) summed over matching leaves.
pub fn oracle_ranking(docs: &[Document], node: &Node, scope: FieldScope, cutoff: usize) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let matched = oracle_matches(docs, node, scope);
    let leaves: Vec<&str> = node.leaves().into_iter().map(|t| t.normalized()).collect();
    let mut ranked: Vec<(String, f64)> = docs
        .iter()
        .filter(|d| matched.contains(&d.id))
        .map(|d| {
            let score = leaves
                .iter()
                .map(|leaf| {
                    let tf = oracle_tf(d, leaf, scope);
                    if tf == 0 {
                        return 0.0;
                    }
                    let df = docs.iter().filter(|x| oracle_tf(x, leaf, scope) > 0).count() as f64;
                    tf as f64 * (1.0 + n / df).ln()
                })
                .sum();
            (d.id.clone(), score)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(cutoff);
    ranked
}

// --------------------------------------------------------------- metrics

/// All seven measures as integer ratios `(numerator, denominator)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMetrics {
    pub retrieved: usize,
    pub relevant: usize,
    pub rel_ret: usize,
    pub recall: Option<(usize, usize)>,
    pub precision: (usize, usize),
    pub p10: (usize, usize),
    pub p20: (usize, usize),
}

pub fn oracle_metrics(ranked: &[String], judged: &BTreeMap<String, bool>) -> OracleMetrics {
    let is_rel = |d: &String| judged.get(d).copied().unwrap_or(false);
    let relevant = judged.values().filter(|&&r| r).count();
    let mut rel_ret = 0;
    let (mut rel10, mut rel20) = (0, 0);
    for (i, d) in ranked.iter().enumerate() {
        if is_rel(d) {
            rel_ret += 1;
            if i < 10 {
                rel10 += 1;
            }
            if i < 20 {
                rel20 += 1;
            }
        }
    }
    OracleMetrics {
        retrieved: ranked.len(),
        relevant,
        rel_ret,
        recall: (relevant > 0).then_some((rel_ret, relevant)),
        precision: (rel_ret, ranked.len().max(1)),
        p10: (rel10, 10),
        p20: (rel20, 20),
    }
}

pub fn ratio((n, d): (usize, usize)) -> f64 {
    n as f64 / d as f64
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

// ------------------------------------------------------------ generators

pub const WORDS: [&str; 16] = [
    "family", "social", "relations", "war", "peace", "labour", "market", "youth", "migration", "policy", "school",
    "health", "poverty", "crime", "media", "city",
];

fn phrase<R: Rng>(rng: &mut R, max_words: usize) -> String {
    let n = rng.gen_range(1..=max_words);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

pub fn random_corpus<R: Rng>(rng: &mut R, max_docs: usize) -> Vec<Document> {
    let n = rng.gen_range(1..=max_docs);
    (0..n)
        .map(|i| {
            let title = phrase(rng, 5);
            let abs = phrase(rng, 12);
            let terms: Vec<String> = (0..rng.gen_range(0..4)).map(|_| phrase(rng, 2)).collect();
            let refs: Vec<&str> = terms.iter().map(String::as_str).collect();
            Document::new(&format!("d{i:03}"), &title, &abs, &refs, vid("B"), "en").unwrap()
        })
        .collect()
}

pub fn random_leaf<R: Rng>(rng: &mut R) -> Node {
    let text = phrase(rng, 2);
    Node::leaf(crosswalk_core::kos::normalize_term(&text).unwrap())
}

/// A random And/Or tree of depth at most `depth`.
pub fn random_tree<R: Rng>(rng: &mut R, depth: usize) -> Node {
    if depth <= 1 || rng.gen_ratio(1, 3) {
        return random_leaf(rng);
    }
    let children: Vec<Node> = (0..rng.gen_range(2..=3)).map(|_| random_tree(rng, depth - 1)).collect();
    if rng.gen_bool(0.5) {
        Node::And(children)
    } else {
        Node::Or(children)
    }
}

/// Random A->B concordance over single words and two-word combinations,
/// with a mix of relation types.
pub fn random_store<R: Rng>(rng: &mut R, max_mappings: usize) -> Store {
    let key = ConcordanceKey::new(vid("A"), vid("B"));
    let mut mappings = Vec::new();
    for _ in 0..rng.gen_range(0..=max_mappings) {
        let start = parse_concept(&vid("A"), &phrase(rng, 2)).unwrap();
        let relation = *[
            RelationType::Equivalence,
            RelationType::Equivalence,
            RelationType::Broader,
            RelationType::Related,
            RelationType::Null,
        ]
        .choose(rng)
        .unwrap();
        let (end, relevance) = if relation == RelationType::Null {
            (None, Relevance::None)
        } else {
            let end = if rng.gen_ratio(1, 4) {
                let a = WORDS.choose(rng).unwrap();
                let b = WORDS.iter().filter(|w| *w != a).collect::<Vec<_>>();
                let b = b.choose(rng).unwrap();
                parse_concept(&vid("B"), &format!("{a} + {b}")).unwrap()
            } else {
                parse_concept(&vid("B"), &phrase(rng, 2)).unwrap()
            };
            (Some(end), Relevance::High)
        };
        mappings.push(Mapping::new(start, relation, vid("B"), end, relevance, Provenance::Asserted).unwrap());
    }
    let mut seen = BTreeSet::new();
    mappings.retain(|m| seen.insert(format!("{m:?}")));
    Store::from_concordances([Concordance::with_mappings(key, mappings).unwrap()])
}

pub fn random_topics<R: Rng>(rng: &mut R, max_topics: usize) -> Vec<Topic> {
    (0..rng.gen_range(1..=max_topics))
        .map(|i| {
            let q = crosswalk_core::query::render_query(&random_tree(rng, 3));
            Topic {
                id: format!("t{i:02}"),
                free_text: Some(q.clone()),
                controlled: BTreeMap::from([(vid("A"), q)]),
            }
        })
        .collect()
}

/// Judges roughly a third of the documents per topic, half of them relevant.
pub fn random_qrels<R: Rng>(rng: &mut R, topics: &[Topic], docs: &[Document]) -> Qrels {
    let mut q = Qrels::new();
    for t in topics {
        for d in docs {
            if rng.gen_ratio(1, 3) {
                q.insert(&t.id, &d.id, rng.gen_bool(0.5));
            }
        }
    }
    q
}

pub fn judged(qrels: &Qrels, topic: &str, docs: &[Document]) -> BTreeMap<String, bool> {
    let relevant = qrels.relevant(topic);
    docs.iter()
        .map(|d| (d.id.clone(), relevant.contains(d.id.as_str())))
        .collect()
}

pub fn ids(list: &RankedList) -> Vec<String> {
    list.doc_ids().map(str::to_string).collect()
}
