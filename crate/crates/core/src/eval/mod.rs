//! Retrieval experiments comparing searches with and without a
//! cross-concordance.
//!
//! Test 1 pairs CT (the vocabulary-A controlled query run verbatim against
//! the controlled fields of corpus B) with TT (the same query translated
//! through A->B). Test 2 pairs FT (free-text search) with FT_TT (free text
//! with A->B equivalents appended).

mod metrics;
mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::concordance::{ConcordanceKey, Store};
use crate::kos::VocabId;
use crate::query::{expand_append, parse_query, translate_replace, AppendOptions, BooleanQuery, SyntaxError};
use crate::search::{FieldScope, Index, RankedList, DEFAULT_CUTOFF};

pub use metrics::{
    average, average_and_delta, compute_metrics, percent_change, Averages, Measure, Measures, MetricsReport,
    TopicMetrics,
};
pub use report::{render_json, render_text};

pub const TOPICS_HEADER: &str = "topic_id\tfree_text\tvocab_id\tcontrolled_query";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("topics line {line}: {message}")]
    Topics { line: usize, message: String },
    #[error("qrels line {line}: {message}")]
    Qrels { line: usize, message: String },
    #[error("scenario {0} needs a concordance")]
    MissingConcordance(Scenario),
    #[error("unknown concordance {0}")]
    UnknownConcordance(ConcordanceKey),
    #[error("topic {topic} has no {variant} query")]
    MissingQueryVariant { topic: String, variant: String },
    #[error("topic {topic}: {source}")]
    Query { topic: String, source: SyntaxError },
    #[error("scenarios were run on different topic sets")]
    TopicSetMismatch,
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("unknown test design {0}; expected 1 or 2")]
    UnknownTestDesign(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub id: String,
    pub free_text: Option<String>,
    /// Controlled query text per vocabulary.
    pub controlled: BTreeMap<VocabId, String>,
}

/// Reads topics; a topic may span several rows, one per vocabulary.
/// Topics are returned ordered by id.
pub fn read_topics<R: BufRead>(reader: R) -> Result<Vec<Topic>, EvalError> {
    let mut topics: BTreeMap<String, Topic> = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() || (lineno == 1 && line == TOPICS_HEADER) {
            continue;
        }
        let err = |message: String| EvalError::Topics { line: lineno, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(err(format!("expected 4 columns, found {}", cols.len())));
        }
        let id = cols[0].trim();
        if id.is_empty() {
            return Err(err("empty topic id".into()));
        }
        let topic = topics.entry(id.to_string()).or_insert_with(|| Topic {
            id: id.to_string(),
            free_text: None,
            controlled: BTreeMap::new(),
        });
        let free_text = cols[1].trim();
        if !free_text.is_empty() {
            match &topic.free_text {
                Some(existing) if existing != free_text => {
                    return Err(err(format!("conflicting free text for topic {id}")))
                }
                _ => topic.free_text = Some(free_text.to_string()),
            }
        }
        let (vocab, query) = (cols[2].trim(), cols[3].trim());
        match (vocab.is_empty(), query.is_empty()) {
            (true, true) => {}
            (false, false) => {
                let vocab = VocabId::new(vocab).map_err(|e| err(e.to_string()))?;
                if topic.controlled.insert(vocab.clone(), query.to_string()).is_some() {
                    return Err(err(format!("topic {id} has two {vocab} queries")));
                }
            }
            _ => return Err(err("vocab_id and controlled_query must be given together".into())),
        }
    }
    Ok(topics.into_values().collect())
}

/// Binary relevance judgments. Unjudged documents are non-relevant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, bool>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a judgment; returns false if `(topic, doc)` was already judged.
    pub fn insert(&mut self, topic: &str, doc: &str, relevant: bool) -> bool {
        let docs = self.judgments.entry(topic.to_string()).or_default();
        if docs.contains_key(doc) {
            return false;
        }
        docs.insert(doc.to_string(), relevant);
        true
    }

    pub fn is_relevant(&self, topic: &str, doc: &str) -> bool {
        self.judgments
            .get(topic)
            .and_then(|d| d.get(doc))
            .copied()
            .unwrap_or(false)
    }

    pub fn relevant(&self, topic: &str) -> BTreeSet<&str> {
        self.judgments
            .get(topic)
            .into_iter()
            .flatten()
            .filter(|(_, &r)| r)
            .map(|(d, _)| d.as_str())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// trec-style lines: `topic_id 0 doc_id {0|1}`.
    pub fn read<R: BufRead>(reader: R) -> Result<Qrels, EvalError> {
        let mut qrels = Qrels::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let err = |message: String| EvalError::Qrels { line: idx + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let [topic, _iteration, doc, rel] = fields[..] else {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            };
            let relevant = match rel {
                "0" => false,
                "1" => true,
                other => return Err(err(format!("relevance must be 0 or 1, found {other:?}"))),
            };
            if !qrels.insert(topic, doc, relevant) {
                return Err(err(format!("duplicate judgment for topic {topic}, document {doc}")));
            }
        }
        Ok(qrels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[allow(non_camel_case_types)]
pub enum Scenario {
    CT,
    TT,
    FT,
    FT_TT,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::CT => "CT",
            Scenario::TT => "TT",
            Scenario::FT => "FT",
            Scenario::FT_TT => "FT_TT",
        }
    }

    /// Label used in text reports.
    pub fn label(self) -> &'static str {
        match self {
            Scenario::FT_TT => "FT+TT",
            other => other.name(),
        }
    }

    pub fn scope(self) -> FieldScope {
        match self {
            Scenario::CT | Scenario::TT => FieldScope::ControlledOnly,
            Scenario::FT | Scenario::FT_TT => FieldScope::FreeText,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "CT" => Ok(Scenario::CT),
            "TT" => Ok(Scenario::TT),
            "FT" => Ok(Scenario::FT),
            "FT_TT" | "FT+TT" => Ok(Scenario::FT_TT),
            other => Err(EvalError::UnknownScenario(other.to_string())),
        }
    }
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestDesign {
    /// CT against TT.
    ControlledTerms,
    /// FT against FT_TT.
    FreeText,
}

impl TestDesign {
    pub fn scenarios(self) -> (Scenario, Scenario) {
        match self {
            TestDesign::ControlledTerms => (Scenario::CT, Scenario::TT),
            TestDesign::FreeText => (Scenario::FT, Scenario::FT_TT),
        }
    }
}

impl FromStr for TestDesign {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "1" => Ok(TestDesign::ControlledTerms),
            "2" => Ok(TestDesign::FreeText),
            other => Err(EvalError::UnknownTestDesign(other.to_string())),
        }
    }
}

fn parse_for(topic: &Topic, text: &str) -> Result<BooleanQuery, EvalError> {
    parse_query(text).map_err(|source| EvalError::Query {
        topic: topic.id.clone(),
        source,
    })
}

fn controlled_query<'a>(topic: &'a Topic, vocab: Option<&VocabId>) -> Result<(&'a VocabId, &'a str), EvalError> {
    let missing = |variant: String| EvalError::MissingQueryVariant {
        topic: topic.id.clone(),
        variant,
    };
    match vocab {
        Some(v) => topic
            .controlled
            .get_key_value(v)
            .map(|(k, q)| (k, q.as_str()))
            .ok_or_else(|| missing(format!("{v} controlled"))),
        None if topic.controlled.len() == 1 => {
            let (k, q) = topic.controlled.iter().next().unwrap();
            Ok((k, q.as_str()))
        }
        None => Err(missing("unambiguous controlled".into())),
    }
}

/// The query a scenario searches for one topic.
pub fn scenario_query(
    scenario: Scenario,
    topic: &Topic,
    store: &Store,
    concordance: Option<&ConcordanceKey>,
) -> Result<BooleanQuery, EvalError> {
    let needs_concordance = || -> Result<&ConcordanceKey, EvalError> {
        let key = concordance.ok_or(EvalError::MissingConcordance(scenario))?;
        store
            .concordance(key)
            .map(|_| key)
            .ok_or_else(|| EvalError::UnknownConcordance(key.clone()))
    };
    let free_text = || {
        topic.free_text.as_deref().ok_or_else(|| EvalError::MissingQueryVariant {
            topic: topic.id.clone(),
            variant: "free-text".into(),
        })
    };
    match scenario {
        Scenario::CT => {
            let (vocab, text) = controlled_query(topic, concordance.map(|k| &k.source))?;
            Ok(parse_for(topic, text)?.tagged(vocab.clone()))
        }
        Scenario::TT => {
            let key = needs_concordance()?;
            let (vocab, text) = controlled_query(topic, Some(&key.source))?;
            let query = parse_for(topic, text)?.tagged(vocab.clone());
            let result = translate_replace(&query, store, key).map_err(|_| EvalError::UnknownConcordance(key.clone()))?;
            Ok(result.query)
        }
        Scenario::FT => parse_for(topic, free_text()?),
        Scenario::FT_TT => {
            let key = needs_concordance()?;
            let query = parse_for(topic, free_text()?)?;
            let options = AppendOptions {
                source: Some(key.source.clone()),
                targets: Some(vec![key.target.clone()]),
            };
            Ok(expand_append(&query, store, &options).query)
        }
    }
}

/// Runs one scenario for every topic with the standard cutoff.
pub fn run_scenario(
    scenario: Scenario,
    topics: &[Topic],
    index: &Index,
    store: &Store,
    concordance: Option<&ConcordanceKey>,
) -> Result<BTreeMap<String, RankedList>, EvalError> {
    topics
        .iter()
        .map(|topic| {
            let query = scenario_query(scenario, topic, store, concordance)?;
            let list = index.search(&topic.id, &query.root, scenario.scope(), DEFAULT_CUTOFF);
            Ok((topic.id.clone(), list))
        })
        .collect()
}

fn topic_metrics(run: &BTreeMap<String, RankedList>, qrels: &Qrels) -> Vec<TopicMetrics> {
    run.iter().map(|(id, list)| compute_metrics(list, qrels, id)).collect()
}

/// Runs both scenarios of a test design and compares them.
pub fn evaluate(
    design: TestDesign,
    topics: &[Topic],
    qrels: &Qrels,
    index: &Index,
    store: &Store,
    concordance: Option<&ConcordanceKey>,
) -> Result<MetricsReport, EvalError> {
    let (baseline, treatment) = design.scenarios();
    let a = run_scenario(baseline, topics, index, store, concordance)?;
    let b = run_scenario(treatment, topics, index, store, concordance)?;
    average_and_delta((baseline, &topic_metrics(&a, qrels)), (treatment, &topic_metrics(&b, qrels)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topics_merge_rows_per_vocabulary() {
        let text = format!("{TOPICS_HEADER}\nt2\tfamily relations\tA\tFamily relations\nt2\t\tB\tFamily\nt1\twar\t\t\n");
        let topics = read_topics(text.as_bytes()).unwrap();
        assert_eq!(topics.len(), 2);
        assert_eq!(topics[0].id, "t1");
        assert!(topics[0].controlled.is_empty());
        assert_eq!(topics[1].controlled.len(), 2);
        assert_eq!(topics[1].free_text.as_deref(), Some("family relations"));
        assert!(matches!(read_topics("t\tx\tA\t\n".as_bytes()), Err(EvalError::Topics { line: 1, .. })));
        assert!(read_topics("t\tx\tA\tq\nt\ty\t\t\n".as_bytes()).is_err());
    }

    #[test]
    fn qrels_reject_duplicates_and_bad_grades() {
        let q = Qrels::read("t1 0 d1 1\nt1 0 d2 0\n\nt2 0 d1 1\n".as_bytes()).unwrap();
        assert_eq!(q.len(), 3);
        assert!(q.is_relevant("t1", "d1"));
        assert!(!q.is_relevant("t1", "d2"));
        assert!(!q.is_relevant("t1", "d9"));
        assert_eq!(q.relevant("t1").len(), 1);
        assert!(matches!(Qrels::read("t1 0 d1 1\nt1 0 d1 0\n".as_bytes()), Err(EvalError::Qrels { line: 2, .. })));
        assert!(Qrels::read("t1 0 d1 2\n".as_bytes()).is_err());
        assert!(Qrels::read("t1 d1 1\n".as_bytes()).is_err());
    }

    #[test]
    fn scenario_names() {
        assert_eq!("FT+TT".parse::<Scenario>().unwrap(), Scenario::FT_TT);
        assert_eq!(Scenario::FT_TT.label(), "FT+TT");
        assert_eq!(Scenario::TT.scope(), FieldScope::ControlledOnly);
        assert_eq!("2".parse::<TestDesign>().unwrap().scenarios(), (Scenario::FT, Scenario::FT_TT));
        assert!("3".parse::<TestDesign>().is_err());
    }
}
