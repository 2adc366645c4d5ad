//! Derivation of `A->C` mappings through a pivot vocabulary `B`.

use std::collections::HashMap;

use super::{
    Concordance, ConcordanceKey, ConcordanceMetadata, Mapping, Provenance, RelationType, Store, StoreError,
};
use crate::kos::{ConceptKey, VocabId};

/// Relation of a two-step chain `x r1 y`, `y r2 z`; `None` when either step
/// is a Null relation.
///
/// Equivalence is neutral, equal hierarchy directions chain, and anything
/// else (mixed hierarchy, any association) becomes an association.
pub fn compose_relations(first: RelationType, second: RelationType) -> Option<RelationType> {
    use RelationType::*;
    Some(match (first, second) {
        (Null, _) | (_, Null) => return None,
        (Equivalence, r) | (r, Equivalence) => r,
        (Broader, Broader) => Broader,
        (Narrower, Narrower) => Narrower,
        _ => Related,
    })
}

// Lower is stronger: = before < before > before ^.
fn strength(r: RelationType) -> u8 {
    match r {
        RelationType::Equivalence => 0,
        RelationType::Broader => 1,
        RelationType::Narrower => 2,
        RelationType::Related => 3,
        RelationType::Null => 4,
    }
}

impl Store {
    /// Composes `source->pivot` with `pivot->target`. Derived mappings carry
    /// the weaker of the two relevances and are flagged
    /// [`Provenance::DerivedViaPivot`]; when several chains relate the same
    /// pair, the strongest relation (then the highest relevance) is kept.
    pub fn compose_pivot(
        &self,
        source: &VocabId,
        pivot: &VocabId,
        target: &VocabId,
    ) -> Result<Concordance, StoreError> {
        if source == pivot || pivot == target || source == target {
            return Err(StoreError::InvalidPivot(format!(
                "{source}, {pivot} and {target} must be three distinct vocabularies"
            )));
        }
        let first_key = ConcordanceKey::new(source.clone(), pivot.clone());
        let second_key = ConcordanceKey::new(pivot.clone(), target.clone());
        let first = self
            .concordance(&first_key)
            .ok_or(StoreError::MissingConcordance(first_key))?;
        let second = self
            .concordance(&second_key)
            .ok_or(StoreError::MissingConcordance(second_key))?;

        let mut by_start: HashMap<ConceptKey, Vec<&Mapping>> = HashMap::new();
        for m in second.mappings() {
            if m.relation() != RelationType::Null {
                by_start.entry(m.start().key()).or_default().push(m);
            }
        }

        let mut derived: Vec<Mapping> = Vec::new();
        let mut slots: HashMap<(ConceptKey, ConceptKey), usize> = HashMap::new();
        for m1 in first.mappings() {
            let Some(mid) = m1.end_key() else { continue };
            for m2 in by_start.get(&mid).into_iter().flatten() {
                let Some(relation) = compose_relations(m1.relation(), m2.relation()) else {
                    continue;
                };
                let end = m2.end().expect("non-null mapping has an end").clone();
                let relevance = m1.relevance().min(m2.relevance());
                let pair = (m1.start().key(), end.key());
                let mapping = Mapping::new(
                    m1.start().clone(),
                    relation,
                    target.clone(),
                    Some(end),
                    relevance,
                    Provenance::DerivedViaPivot,
                )
                .expect("composed mapping satisfies invariants");
                match slots.get(&pair) {
                    Some(&i) => {
                        let kept = &derived[i];
                        let better = (strength(relation), std::cmp::Reverse(relevance))
                            < (strength(kept.relation()), std::cmp::Reverse(kept.relevance()));
                        if better {
                            derived[i] = mapping;
                        }
                    }
                    None => {
                        slots.insert(pair, derived.len());
                        derived.push(mapping);
                    }
                }
            }
        }

        let mut out = Concordance::with_mappings(ConcordanceKey::new(source.clone(), target.clone()), derived)?;
        out.metadata = ConcordanceMetadata {
            name: Some(format!("derived {source}->{pivot}->{target}")),
            date: None,
        };
        Ok(out)
    }
}
