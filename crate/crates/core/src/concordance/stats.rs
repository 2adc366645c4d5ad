use std::collections::HashSet;
use std::ops::Index;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::{Concordance, ConcordanceKey, RelationType, Store, StoreError};

/// One value per relation type, serialized as a symbol-keyed map.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerRelation<T>([T; 5]);

pub type RelationCounts = PerRelation<usize>;

fn slot(r: RelationType) -> usize {
    RelationType::ALL.iter().position(|x| *x == r).unwrap()
}

impl<T> Index<RelationType> for PerRelation<T> {
    type Output = T;
    fn index(&self, r: RelationType) -> &T {
        &self.0[slot(r)]
    }
}

impl<T: Copy> PerRelation<T> {
    pub fn iter(&self) -> impl Iterator<Item = (RelationType, T)> + '_ {
        RelationType::ALL.into_iter().map(move |r| (r, self[r]))
    }
}

impl<T: Serialize> Serialize for PerRelation<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(5))?;
        for (r, v) in RelationType::ALL.iter().zip(&self.0) {
            map.serialize_entry(r.symbol(), v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceStats {
    pub total: usize,
    /// Set when there are no mappings; fractions are then all 0.
    pub empty: bool,
    pub relation_counts: RelationCounts,
    pub relation_fractions: PerRelation<f64>,
    pub n_start_concepts: usize,
    pub n_end_concepts: usize,
    pub relations_per_start: f64,
}

impl ConcordanceStats {
    fn compute<'a>(concordances: impl IntoIterator<Item = &'a Concordance>) -> Self {
        let mut counts = [0usize; 5];
        let mut starts = HashSet::new();
        let mut ends = HashSet::new();
        for c in concordances {
            for m in c.mappings() {
                counts[slot(m.relation())] += 1;
                starts.insert(m.start());
                if let Some(e) = m.end() {
                    ends.insert(e);
                }
            }
        }
        let total: usize = counts.iter().sum();
        let fractions = counts.map(|n| if total == 0 { 0.0 } else { n as f64 / total as f64 });
        ConcordanceStats {
            total,
            empty: total == 0,
            relation_counts: PerRelation(counts),
            relation_fractions: PerRelation(fractions),
            n_start_concepts: starts.len(),
            n_end_concepts: ends.len(),
            relations_per_start: if starts.is_empty() {
                0.0
            } else {
                total as f64 / starts.len() as f64
            },
        }
    }
}

impl Store {
    /// Relation distribution of one concordance, or of the whole store.
    pub fn stats(&self, concordance: Option<&ConcordanceKey>) -> Result<ConcordanceStats, StoreError> {
        match concordance {
            Some(key) => self
                .concordance(key)
                .map(|c| ConcordanceStats::compute([c]))
                .ok_or_else(|| StoreError::UnknownConcordance(key.to_string())),
            None => Ok(ConcordanceStats::compute(self.concordances())),
        }
    }
}
