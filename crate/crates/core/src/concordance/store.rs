use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;

use serde::Serialize;
use thiserror::Error;

use super::tsv::{read_rows, LoadError};
use super::{Concordance, ConcordanceKey, ConcordanceMetadata, Mapping, Provenance, RelationType, Relevance};
use crate::kos::{Concept, ConceptKey, Registry, Term, VocabId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("unknown vocabulary {0}")]
    UnknownVocabulary(String),
    #[error("unknown concordance {0}")]
    UnknownConcordance(String),
    #[error("concordance name {0:?} is ambiguous")]
    AmbiguousConcordance(String),
    #[error("missing concordance {0}")]
    MissingConcordance(ConcordanceKey),
    #[error("mapping {mapping} does not belong to concordance {concordance}")]
    ForeignMapping {
        concordance: ConcordanceKey,
        mapping: ConcordanceKey,
    },
    #[error("invalid pivot: {0}")]
    InvalidPivot(String),
}

/// Restrictions applied by [`Store::query_mappings`].
#[derive(Debug, Clone, Default)]
pub struct MappingFilter {
    pub target: Option<VocabId>,
    pub relations: Option<BTreeSet<RelationType>>,
    pub min_relevance: Option<Relevance>,
}

impl MappingFilter {
    pub fn target(mut self, target: VocabId) -> Self {
        self.target = Some(target);
        self
    }

    pub fn relations(mut self, relations: impl IntoIterator<Item = RelationType>) -> Self {
        self.relations = Some(relations.into_iter().collect());
        self
    }

    pub fn min_relevance(mut self, relevance: Relevance) -> Self {
        self.min_relevance = Some(relevance);
        self
    }

    fn accepts(&self, m: &Mapping) -> bool {
        self.target.as_ref().is_none_or(|t| m.target() == t)
            && self.relations.as_ref().is_none_or(|rs| rs.contains(&m.relation()))
            && self.min_relevance.is_none_or(|r| m.relevance() >= r)
    }
}

/// An equivalent concept together with the concordance it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Equivalent<'a> {
    pub concept: &'a Concept,
    pub concordance: &'a ConcordanceKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelevanceConflict {
    pub line: Option<usize>,
    pub concordance: String,
    pub start: String,
    pub relation: RelationType,
    pub end: String,
    pub relevances: Vec<Relevance>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub mappings: usize,
    pub duplicates_collapsed: usize,
    pub relevance_conflicts: Vec<RelevanceConflict>,
}

type MappingIdentity = (ConceptKey, RelationType, Option<ConceptKey>, Provenance);

#[derive(Default)]
struct Pending {
    mappings: Vec<Mapping>,
    seen: HashMap<MappingIdentity, Vec<Relevance>>,
    metadata: ConcordanceMetadata,
}

/// Single-writer loader; [`StoreBuilder::freeze`] produces the read-only [`Store`].
#[derive(Default)]
pub struct StoreBuilder {
    registry: Registry,
    strict: bool,
    concordances: BTreeMap<ConcordanceKey, Pending>,
    report: LoadReport,
}

impl StoreBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every vocabulary used by a mapping must then be registered.
    pub fn with_registry(registry: Registry) -> Self {
        StoreBuilder {
            registry,
            strict: true,
            ..Self::default()
        }
    }

    pub fn load_tsv<R: BufRead>(&mut self, reader: R) -> Result<&mut Self, LoadError> {
        let rows = read_rows(reader)?;
        for row in rows {
            if self.strict {
                for vocab in [row.mapping.source(), row.mapping.target()] {
                    if !self.registry.contains(vocab.as_str()) {
                        return Err(LoadError::UnregisteredVocabulary {
                            line: row.line,
                            vocab: vocab.to_string(),
                        });
                    }
                }
            }
            self.add_mapping_at(row.mapping, Some(row.line));
        }
        Ok(self)
    }

    /// Adds one mapping. Exact duplicates are collapsed (first kept); a
    /// mapping differing only in relevance is kept and reported.
    pub fn add_mapping(&mut self, mapping: Mapping) -> bool {
        self.add_mapping_at(mapping, None)
    }

    fn add_mapping_at(&mut self, mapping: Mapping, line: Option<usize>) -> bool {
        self.report.rows_read += 1;
        let pending = self.concordances.entry(mapping.key()).or_default();
        let identity = (
            mapping.start().key(),
            mapping.relation(),
            mapping.end_key(),
            mapping.provenance(),
        );
        let relevances = pending.seen.entry(identity).or_default();
        if relevances.contains(&mapping.relevance()) {
            self.report.duplicates_collapsed += 1;
            return false;
        }
        relevances.push(mapping.relevance());
        if relevances.len() > 1 {
            self.report.relevance_conflicts.push(RelevanceConflict {
                line,
                concordance: mapping.key().to_string(),
                start: mapping.start().canonical(),
                relation: mapping.relation(),
                end: mapping.end_canonical(),
                relevances: relevances.clone(),
            });
        }
        pending.mappings.push(mapping);
        self.report.mappings += 1;
        true
    }

    /// Declares an (possibly empty) concordance and merges its mappings.
    pub fn add_concordance(&mut self, concordance: Concordance) {
        let key = concordance.key().clone();
        let metadata = concordance.metadata.clone();
        self.concordances.entry(key.clone()).or_default();
        for m in concordance.mappings {
            self.add_mapping(m);
        }
        if metadata != ConcordanceMetadata::default() {
            self.set_metadata(&key, metadata);
        }
    }

    pub fn set_metadata(&mut self, key: &ConcordanceKey, metadata: ConcordanceMetadata) {
        self.concordances.entry(key.clone()).or_default().metadata = metadata;
    }

    pub fn report(&self) -> &LoadReport {
        &self.report
    }

    pub fn freeze(self) -> Store {
        let mut vocabularies: BTreeSet<VocabId> = self.registry.iter().map(|v| v.id.clone()).collect();
        let mut concordances = Vec::with_capacity(self.concordances.len());
        let mut by_key = BTreeMap::new();
        let mut by_start: HashMap<ConceptKey, Vec<(u32, u32)>> = HashMap::new();
        for (ci, (key, pending)) in self.concordances.into_iter().enumerate() {
            vocabularies.insert(key.source.clone());
            vocabularies.insert(key.target.clone());
            for (mi, m) in pending.mappings.iter().enumerate() {
                by_start.entry(m.start().key()).or_default().push((ci as u32, mi as u32));
            }
            by_key.insert(key.clone(), ci);
            concordances.push(Concordance {
                key,
                mappings: pending.mappings,
                metadata: pending.metadata,
            });
        }
        Store {
            registry: self.registry,
            vocabularies,
            concordances,
            by_key,
            by_start,
        }
    }
}

/// Frozen, read-only set of concordances with a start-concept index.
#[derive(Debug, Clone, Default)]
pub struct Store {
    registry: Registry,
    vocabularies: BTreeSet<VocabId>,
    concordances: Vec<Concordance>,
    by_key: BTreeMap<ConcordanceKey, usize>,
    by_start: HashMap<ConceptKey, Vec<(u32, u32)>>,
}

impl Store {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load_tsv<R: BufRead>(reader: R) -> Result<Store, LoadError> {
        let mut builder = StoreBuilder::new();
        builder.load_tsv(reader)?;
        Ok(builder.freeze())
    }

    pub fn from_concordances(concordances: impl IntoIterator<Item = Concordance>) -> Store {
        let mut builder = StoreBuilder::new();
        for c in concordances {
            builder.add_concordance(c);
        }
        builder.freeze()
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// Every vocabulary that is registered or used by some concordance.
    pub fn vocabularies(&self) -> impl Iterator<Item = &VocabId> {
        self.vocabularies.iter()
    }

    pub fn knows_vocabulary(&self, id: &str) -> bool {
        self.vocabularies.contains(id)
    }

    pub fn vocabulary(&self, id: &str) -> Result<&VocabId, StoreError> {
        self.vocabularies
            .get(id)
            .ok_or_else(|| StoreError::UnknownVocabulary(id.to_string()))
    }

    pub fn concordances(&self) -> &[Concordance] {
        &self.concordances
    }

    pub fn concordance(&self, key: &ConcordanceKey) -> Option<&Concordance> {
        self.by_key.get(key).map(|&i| &self.concordances[i])
    }

    pub fn mapping_count(&self) -> usize {
        self.concordances.iter().map(Concordance::len).sum()
    }

    /// Resolves `A->B`, or `A-B` when exactly one split at a `-` names an
    /// existing concordance.
    pub fn resolve_concordance(&self, name: &str) -> Result<ConcordanceKey, StoreError> {
        let unknown = || StoreError::UnknownConcordance(name.to_string());
        if let Some((a, b)) = name.split_once("->") {
            let key = ConcordanceKey::new(
                VocabId::new(a).map_err(|_| unknown())?,
                VocabId::new(b).map_err(|_| unknown())?,
            );
            return self.by_key.contains_key(&key).then_some(key).ok_or_else(unknown);
        }
        let candidates: Vec<&ConcordanceKey> = self
            .by_key
            .keys()
            .filter(|k| {
                name.len() == k.source.as_str().len() + 1 + k.target.as_str().len()
                    && name.starts_with(k.source.as_str())
                    && name[k.source.as_str().len()..].starts_with('-')
                    && name.ends_with(k.target.as_str())
            })
            .collect();
        match candidates.as_slice() {
            [one] => Ok((*one).clone()),
            [] => Err(unknown()),
            _ => Err(StoreError::AmbiguousConcordance(name.to_string())),
        }
    }

    fn entries<'a>(&'a self, start: &ConceptKey) -> impl Iterator<Item = (&'a Concordance, &'a Mapping)> + 'a {
        self.by_start
            .get(start)
            .into_iter()
            .flatten()
            .map(move |&(ci, mi)| {
                let c = &self.concordances[ci as usize];
                (c, &c.mappings[mi as usize])
            })
    }

    /// All mappings of `start` (normalized, order-insensitive) out of
    /// `source`, ordered by target vocabulary, relation symbol and end text.
    pub fn query_mappings(
        &self,
        source: &str,
        start: &ConceptKey,
        filter: &MappingFilter,
    ) -> Result<Vec<&Mapping>, StoreError> {
        self.vocabulary(source)?;
        if let Some(t) = &filter.target {
            self.vocabulary(t.as_str())?;
        }
        let mut hits: Vec<&Mapping> = self
            .entries(start)
            .filter(|(c, m)| c.source().as_str() == source && filter.accepts(m))
            .map(|(_, m)| m)
            .collect();
        hits.sort_by_cached_key(|m| (m.target().clone(), m.relation().symbol(), m.end_canonical()));
        Ok(hits)
    }

    /// Concepts one Equivalence step away from the single-term concept
    /// `term`, over every concordance (or those out of `source`).
    pub fn equivalents(&self, term: &Term, source: Option<&VocabId>) -> Vec<Concept> {
        self.equivalents_in(term, source, None)
            .into_iter()
            .map(|e| e.concept.clone())
            .collect()
    }

    /// Like [`Store::equivalents`], optionally restricted to target
    /// vocabularies, keeping the concordance each concept came from.
    /// Deduplicated on (vocabulary, term set); ordered by vocabulary then
    /// canonical text.
    pub fn equivalents_in<'a>(
        &'a self,
        term: &Term,
        source: Option<&VocabId>,
        targets: Option<&[VocabId]>,
    ) -> Vec<Equivalent<'a>> {
        let key = ConceptKey::single(term);
        let mut start_vocabs = BTreeSet::new();
        let mut found: Vec<Equivalent<'a>> = Vec::new();
        let mut seen = BTreeSet::new();
        for (c, m) in self.entries(&key) {
            if source.is_some_and(|s| c.source() != s) {
                continue;
            }
            start_vocabs.insert(c.source());
            if m.relation() != RelationType::Equivalence {
                continue;
            }
            if targets.is_some_and(|ts| !ts.contains(c.target())) {
                continue;
            }
            let end = m.end().expect("equivalence mappings have an end");
            if seen.insert((end.vocabulary().clone(), end.key())) {
                found.push(Equivalent {
                    concept: end,
                    concordance: c.key(),
                });
            }
        }
        found.retain(|e| !(start_vocabs.contains(e.concept.vocabulary()) && e.concept.key() == key));
        found.sort_by_cached_key(|e| (e.concept.vocabulary().clone(), e.concept.canonical()));
        found
    }
}
