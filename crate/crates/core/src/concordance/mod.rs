//! Directed cross-concordances between controlled vocabularies.
//!
//! A [`Concordance`] holds every [`Mapping`] from one source vocabulary to one
//! target vocabulary. `A->B` and `B->A` are unrelated objects: nothing is
//! inferred in the reverse direction.

mod graph;
mod pivot;
mod skos;
mod stats;
mod store;
mod tsv;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kos::{Concept, ConceptKey, KosError, VocabId};

pub use graph::export_graph;
pub use pivot::compose_relations;
pub use skos::{export_skos, import_skos, SkosError, EXT_NS, SKOS_NS};
pub use stats::{ConcordanceStats, PerRelation, RelationCounts};
pub use store::{Equivalent, LoadReport, MappingFilter, RelevanceConflict, Store, StoreBuilder, StoreError};
pub use tsv::{write_tsv, LoadError, MAPPING_HEADER, MAPPING_HEADER_WITH_PROVENANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationType {
    #[serde(rename = "=")]
    Equivalence,
    #[serde(rename = "<")]
    Broader,
    #[serde(rename = ">")]
    Narrower,
    #[serde(rename = "^")]
    Related,
    #[serde(rename = "0")]
    Null,
}

impl RelationType {
    pub const ALL: [RelationType; 5] = [
        RelationType::Equivalence,
        RelationType::Broader,
        RelationType::Narrower,
        RelationType::Related,
        RelationType::Null,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            RelationType::Equivalence => "=",
            RelationType::Broader => "<",
            RelationType::Narrower => ">",
            RelationType::Related => "^",
            RelationType::Null => "0",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationType::Equivalence => "equivalence",
            RelationType::Broader => "broader",
            RelationType::Narrower => "narrower",
            RelationType::Related => "related",
            RelationType::Null => "null",
        }
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for RelationType {
    type Err = MappingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationType::ALL
            .into_iter()
            .find(|r| r.symbol() == s)
            .ok_or_else(|| MappingError::UnknownRelation(s.to_string()))
    }
}

/// Quality tag of a mapping. `None` exists only for Null relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relevance {
    None,
    Low,
    Medium,
    High,
}

impl Relevance {
    pub fn as_str(self) -> &'static str {
        match self {
            Relevance::None => "none",
            Relevance::Low => "low",
            Relevance::Medium => "medium",
            Relevance::High => "high",
        }
    }
}

impl fmt::Display for Relevance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relevance {
    type Err = MappingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Relevance::None),
            "low" => Ok(Relevance::Low),
            "medium" => Ok(Relevance::Medium),
            "high" => Ok(Relevance::High),
            other => Err(MappingError::UnknownRelevance(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    Asserted,
    DerivedViaPivot,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Asserted => "asserted",
            Provenance::DerivedViaPivot => "derived_via_pivot",
        }
    }
}

impl FromStr for Provenance {
    type Err = MappingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asserted" => Ok(Provenance::Asserted),
            "derived_via_pivot" => Ok(Provenance::DerivedViaPivot),
            other => Err(MappingError::UnknownProvenance(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("unknown relation symbol {0:?}")]
    UnknownRelation(String),
    #[error("unknown relevance {0:?}")]
    UnknownRelevance(String),
    #[error("unknown provenance {0:?}")]
    UnknownProvenance(String),
    #[error("null relation must not have an end concept")]
    NullWithEnd,
    #[error("relation {0} requires an end concept")]
    MissingEnd(RelationType),
    #[error("relevance {relevance} is not allowed on a {relation} relation")]
    RelevanceMismatch { relation: RelationType, relevance: Relevance },
    #[error("mapping stays inside vocabulary {0}")]
    SameVocabulary(VocabId),
    #[error("end concept belongs to {found}, expected {expected}")]
    TargetMismatch { expected: VocabId, found: VocabId },
    #[error(transparent)]
    Term(#[from] KosError),
}

/// One directed relation from a start concept to an end concept (absent for
/// Null relations).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mapping {
    start: Concept,
    relation: RelationType,
    target: VocabId,
    end: Option<Concept>,
    relevance: Relevance,
    provenance: Provenance,
}

impl Mapping {
    pub fn new(
        start: Concept,
        relation: RelationType,
        target: VocabId,
        end: Option<Concept>,
        relevance: Relevance,
        provenance: Provenance,
    ) -> Result<Self, MappingError> {
        let is_null = relation == RelationType::Null;
        match (&end, is_null) {
            (Some(_), true) => return Err(MappingError::NullWithEnd),
            (None, false) => return Err(MappingError::MissingEnd(relation)),
            _ => {}
        }
        if is_null != (relevance == Relevance::None) {
            return Err(MappingError::RelevanceMismatch { relation, relevance });
        }
        if *start.vocabulary() == target {
            return Err(MappingError::SameVocabulary(target));
        }
        if let Some(end) = &end {
            if *end.vocabulary() != target {
                return Err(MappingError::TargetMismatch {
                    expected: target,
                    found: end.vocabulary().clone(),
                });
            }
        }
        Ok(Mapping {
            start,
            relation,
            target,
            end,
            relevance,
            provenance,
        })
    }

    pub fn start(&self) -> &Concept {
        &self.start
    }

    pub fn relation(&self) -> RelationType {
        self.relation
    }

    /// Target vocabulary; defined for Null mappings as well.
    pub fn target(&self) -> &VocabId {
        &self.target
    }

    pub fn end(&self) -> Option<&Concept> {
        self.end.as_ref()
    }

    pub fn relevance(&self) -> Relevance {
        self.relevance
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn source(&self) -> &VocabId {
        self.start.vocabulary()
    }

    pub fn key(&self) -> ConcordanceKey {
        ConcordanceKey::new(self.source().clone(), self.target.clone())
    }

    pub(crate) fn end_key(&self) -> Option<ConceptKey> {
        self.end.as_ref().map(Concept::key)
    }

    /// Canonical text of the end concept, empty for Null mappings.
    pub fn end_canonical(&self) -> String {
        self.end.as_ref().map(Concept::canonical).unwrap_or_default()
    }
}

/// Identifies a directed concordance `source->target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConcordanceKey {
    pub source: VocabId,
    pub target: VocabId,
}

impl ConcordanceKey {
    pub fn new(source: VocabId, target: VocabId) -> Self {
        ConcordanceKey { source, target }
    }
}

impl fmt::Display for ConcordanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.source, self.target)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcordanceMetadata {
    pub name: Option<String>,
    pub date: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concordance {
    key: ConcordanceKey,
    mappings: Vec<Mapping>,
    pub metadata: ConcordanceMetadata,
}

impl Concordance {
    pub fn new(key: ConcordanceKey) -> Self {
        Concordance {
            key,
            mappings: Vec::new(),
            metadata: ConcordanceMetadata::default(),
        }
    }

    /// Builds a concordance, checking that every mapping belongs to `key`.
    pub fn with_mappings(key: ConcordanceKey, mappings: Vec<Mapping>) -> Result<Self, StoreError> {
        let mut c = Concordance::new(key);
        for m in mappings {
            c.push(m)?;
        }
        Ok(c)
    }

    pub(crate) fn push(&mut self, mapping: Mapping) -> Result<(), StoreError> {
        if mapping.source() != &self.key.source || mapping.target() != &self.key.target {
            return Err(StoreError::ForeignMapping {
                concordance: self.key.clone(),
                mapping: mapping.key(),
            });
        }
        self.mappings.push(mapping);
        Ok(())
    }

    pub fn key(&self) -> &ConcordanceKey {
        &self.key
    }

    pub fn source(&self) -> &VocabId {
        &self.key.source
    }

    pub fn target(&self) -> &VocabId {
        &self.key.target
    }

    pub fn mappings(&self) -> &[Mapping] {
        &self.mappings
    }

    pub fn len(&self) -> usize {
        self.mappings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mappings.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kos::parse_concept;

    fn concept(v: &str, t: &str) -> Concept {
        parse_concept(&VocabId::new(v).unwrap(), t).unwrap()
    }

    fn vid(v: &str) -> VocabId {
        VocabId::new(v).unwrap()
    }

    #[test]
    fn relation_symbols_are_exact() {
        for r in RelationType::ALL {
            assert_eq!(r.symbol().parse::<RelationType>().unwrap(), r);
        }
        assert!("^+".parse::<RelationType>().is_err());
        assert!("~".parse::<RelationType>().is_err());
    }

    #[test]
    fn relevance_is_ordered() {
        assert!(Relevance::High > Relevance::Medium);
        assert!(Relevance::Medium > Relevance::Low);
        assert!(Relevance::Low > Relevance::None);
    }

    #[test]
    fn mapping_invariants() {
        let a = concept("A", "isdn device");
        let b = concept("B", "telecommunications");
        assert_eq!(
            Mapping::new(a.clone(), RelationType::Null, vid("B"), Some(b.clone()), Relevance::None, Provenance::Asserted)
                .unwrap_err(),
            MappingError::NullWithEnd
        );
        assert!(matches!(
            Mapping::new(a.clone(), RelationType::Null, vid("B"), None, Relevance::High, Provenance::Asserted),
            Err(MappingError::RelevanceMismatch { .. })
        ));
        assert!(matches!(
            Mapping::new(a.clone(), RelationType::Broader, vid("B"), Some(b.clone()), Relevance::None, Provenance::Asserted),
            Err(MappingError::RelevanceMismatch { .. })
        ));
        assert_eq!(
            Mapping::new(a.clone(), RelationType::Broader, vid("B"), None, Relevance::High, Provenance::Asserted)
                .unwrap_err(),
            MappingError::MissingEnd(RelationType::Broader)
        );
        assert!(matches!(
            Mapping::new(a.clone(), RelationType::Related, vid("A"), Some(concept("A", "x")), Relevance::Low, Provenance::Asserted),
            Err(MappingError::SameVocabulary(_))
        ));
        assert!(matches!(
            Mapping::new(a.clone(), RelationType::Related, vid("C"), Some(b.clone()), Relevance::Low, Provenance::Asserted),
            Err(MappingError::TargetMismatch { .. })
        ));
        let ok = Mapping::new(a, RelationType::Null, vid("B"), None, Relevance::None, Provenance::Asserted).unwrap();
        assert_eq!(ok.end_canonical(), "");
        assert_eq!(ok.key().to_string(), "A->B");
    }

    #[test]
    fn concordance_rejects_foreign_mappings() {
        let m = Mapping::new(
            concept("A", "x"),
            RelationType::Equivalence,
            vid("C"),
            Some(concept("C", "y")),
            Relevance::High,
            Provenance::Asserted,
        )
        .unwrap();
        let err = Concordance::with_mappings(ConcordanceKey::new(vid("A"), vid("B")), vec![m]).unwrap_err();
        assert!(matches!(err, StoreError::ForeignMapping { .. }));
    }
}
