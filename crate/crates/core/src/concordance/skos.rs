//! SKOS mapping export and import (Turtle).
//!
//! Every non-Null mapping becomes a plain SKOS triple such as
//! `<isdn> skos:broadMatch <telecommunications>`. Alongside, each mapping is
//! described by an `xc:Mapping` resource in the extension namespace carrying
//! what SKOS cannot express: Null relations, relevance, provenance, raw
//! labels and the original order. Documents without extension resources are
//! imported from their plain SKOS triples.

use std::collections::{BTreeMap, BTreeSet};

use oxrdf::vocab::{rdf, xsd};
use oxrdf::{Graph, Literal, NamedNode, NamedNodeRef, Subject, SubjectRef, TermRef, Triple};
use oxttl::{TurtleParser, TurtleSerializer};
use thiserror::Error;

use super::{Concordance, ConcordanceKey, ConcordanceMetadata, Mapping, MappingError, Provenance, RelationType, Relevance};
use crate::kos::{parse_concept, Concept, KosError, VocabId};

pub const SKOS_NS: &str = "http://www.w3.org/2004/02/skos/core#";
pub const EXT_NS: &str = "https://crosswalk.invalid/ns#";
const DCTERMS_NS: &str = "http://purl.org/dc/terms/";

/// Relevance given to mappings imported from plain SKOS triples.
pub const PLAIN_SKOS_RELEVANCE: Relevance = Relevance::Medium;

#[derive(Debug, Error)]
pub enum SkosError {
    #[error("turtle syntax error: {0}")]
    Syntax(String),
    #[error("unsupported SKOS mapping property <{0}>")]
    UnsupportedSkosProperty(String),
    #[error("malformed mapping document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Term(#[from] KosError),
}

fn skos(local: &str) -> NamedNode {
    NamedNode::new_unchecked(format!("{SKOS_NS}{local}"))
}

fn ext(local: &str) -> NamedNode {
    NamedNode::new_unchecked(format!("{EXT_NS}{local}"))
}

fn dcterms(local: &str) -> NamedNode {
    NamedNode::new_unchecked(format!("{DCTERMS_NS}{local}"))
}

fn skos_property(relation: RelationType) -> Option<&'static str> {
    match relation {
        RelationType::Equivalence => Some("exactMatch"),
        RelationType::Broader => Some("broadMatch"),
        RelationType::Narrower => Some("narrowMatch"),
        RelationType::Related => Some("relatedMatch"),
        RelationType::Null => None,
    }
}

fn relation_predicate(relation: RelationType) -> NamedNode {
    match skos_property(relation) {
        Some(local) => skos(local),
        None => ext("nullMatch"),
    }
}

fn relation_for_predicate(iri: &str) -> Result<RelationType, SkosError> {
    if iri == format!("{EXT_NS}nullMatch") {
        return Ok(RelationType::Null);
    }
    RelationType::ALL
        .into_iter()
        .find(|r| skos_property(*r).is_some_and(|local| iri.strip_prefix(SKOS_NS) == Some(local)))
        .ok_or_else(|| SkosError::UnsupportedSkosProperty(iri.to_string()))
}

// SKOS mapping properties we cannot represent (closeMatch, mappingRelation, ...).
fn is_skos_mapping_property(iri: &str) -> bool {
    iri.strip_prefix(SKOS_NS)
        .is_some_and(|local| local.ends_with("Match") || local == "mappingRelation")
}

fn pct(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for b in text.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

fn scheme_iri(vocab: &VocabId) -> NamedNode {
    NamedNode::new_unchecked(format!("urn:crosswalk:scheme:{}", pct(vocab.as_str())))
}

fn concept_iri(concept: &Concept) -> NamedNode {
    NamedNode::new_unchecked(format!(
        "urn:crosswalk:concept:{}:{}",
        pct(concept.vocabulary().as_str()),
        pct(&concept.canonical())
    ))
}

fn concordance_iri(key: &ConcordanceKey) -> NamedNode {
    NamedNode::new_unchecked(format!(
        "urn:crosswalk:concordance:{}:{}",
        pct(key.source.as_str()),
        pct(key.target.as_str())
    ))
}

/// Serializes a concordance as Turtle.
pub fn export_skos(concordance: &Concordance) -> String {
    let mut triples: Vec<Triple> = Vec::new();
    let mut push = |s: &NamedNode, p: NamedNode, o: oxrdf::Term| {
        triples.push(Triple::new(s.clone(), p, o));
    };
    let key = concordance.key();
    let conc = concordance_iri(key);
    push(&conc, rdf::TYPE.into_owned(), ext("Concordance").into());
    push(&conc, ext("sourceScheme"), scheme_iri(&key.source).into());
    push(&conc, ext("targetScheme"), scheme_iri(&key.target).into());
    if let Some(name) = &concordance.metadata.name {
        push(&conc, dcterms("title"), Literal::new_simple_literal(name).into());
    }
    if let Some(date) = &concordance.metadata.date {
        push(&conc, dcterms("date"), Literal::new_simple_literal(date).into());
    }
    for vocab in [&key.source, &key.target] {
        let scheme = scheme_iri(vocab);
        push(&scheme, rdf::TYPE.into_owned(), skos("ConceptScheme").into());
        push(&scheme, ext("vocabularyId"), Literal::new_simple_literal(vocab.as_str()).into());
    }

    let mut described = BTreeSet::new();
    for (position, m) in concordance.mappings().iter().enumerate() {
        for concept in std::iter::once(m.start()).chain(m.end()) {
            let iri = concept_iri(concept);
            if described.insert(iri.clone()) {
                push(&iri, rdf::TYPE.into_owned(), skos("Concept").into());
                push(&iri, skos("inScheme"), scheme_iri(concept.vocabulary()).into());
                push(&iri, skos("prefLabel"), Literal::new_simple_literal(concept.display_text()).into());
            }
        }
        let start = concept_iri(m.start());
        if let Some(end) = m.end() {
            push(&start, relation_predicate(m.relation()), concept_iri(end).into());
        }
        let node = NamedNode::new_unchecked(format!("{}:mapping:{position}", conc.as_str()));
        push(&node, rdf::TYPE.into_owned(), ext("Mapping").into());
        push(&node, ext("concordance"), conc.clone().into());
        push(
            &node,
            ext("position"),
            Literal::new_typed_literal(position.to_string(), xsd::INTEGER).into(),
        );
        push(&node, ext("subject"), start.into());
        push(&node, ext("subjectLabel"), Literal::new_simple_literal(m.start().display_text()).into());
        push(&node, ext("predicate"), relation_predicate(m.relation()).into());
        if let Some(end) = m.end() {
            push(&node, ext("object"), concept_iri(end).into());
            push(&node, ext("objectLabel"), Literal::new_simple_literal(end.display_text()).into());
        }
        push(&node, ext("relevance"), Literal::new_simple_literal(m.relevance().as_str()).into());
        push(&node, ext("provenance"), Literal::new_simple_literal(m.provenance().as_str()).into());
    }

    let mut serializer = TurtleSerializer::new()
        .with_prefix("skos", SKOS_NS)
        .and_then(|s| s.with_prefix("xc", EXT_NS))
        .and_then(|s| s.with_prefix("dcterms", DCTERMS_NS))
        .and_then(|s| s.with_prefix("xsd", "http://www.w3.org/2001/XMLSchema#"))
        .and_then(|s| s.with_prefix("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"))
        .expect("static prefixes are valid IRIs")
        .for_writer(Vec::new());
    for t in &triples {
        serializer.serialize_triple(t).expect("writing to memory");
    }
    String::from_utf8(serializer.finish().expect("writing to memory")).expect("turtle is UTF-8")
}

fn literal<'a>(graph: &'a Graph, subject: SubjectRef<'_>, predicate: &NamedNode) -> Option<&'a str> {
    match graph.object_for_subject_predicate(subject, predicate)? {
        TermRef::Literal(l) => Some(l.value()),
        _ => None,
    }
}

fn named<'a>(graph: &'a Graph, subject: SubjectRef<'_>, predicate: &NamedNode) -> Option<NamedNodeRef<'a>> {
    match graph.object_for_subject_predicate(subject, predicate)? {
        TermRef::NamedNode(n) => Some(n),
        _ => None,
    }
}

fn malformed(message: impl Into<String>) -> SkosError {
    SkosError::Malformed(message.into())
}

fn scheme_vocab(graph: &Graph, scheme: NamedNodeRef<'_>) -> Result<VocabId, SkosError> {
    let subject = SubjectRef::from(scheme);
    let id = literal(graph, subject, &ext("vocabularyId"))
        .or_else(|| literal(graph, subject, &skos("notation")))
        .map(str::to_string)
        .unwrap_or_else(|| {
            let iri = scheme.as_str();
            iri.rsplit(['/', '#', ':']).next().unwrap_or(iri).to_string()
        });
    Ok(VocabId::new(&id)?)
}

/// Parses a Turtle document produced by [`export_skos`] (lossless) or a
/// plain SKOS mapping document.
pub fn import_skos(document: &str) -> Result<Concordance, SkosError> {
    let mut graph = Graph::new();
    for triple in TurtleParser::new().for_slice(document.as_bytes()) {
        let triple = triple.map_err(|e| SkosError::Syntax(e.to_string()))?;
        graph.insert(&triple);
    }
    for t in graph.iter() {
        if is_skos_mapping_property(t.predicate.as_str()) {
            relation_for_predicate(t.predicate.as_str())?;
        }
    }

    let concordance_nodes: Vec<Subject> = graph
        .subjects_for_predicate_object(rdf::TYPE, &ext("Concordance"))
        .map(|s| s.into_owned())
        .collect();
    match concordance_nodes.as_slice() {
        [] => import_plain(&graph),
        [node] => import_extended(&graph, node.as_ref()),
        _ => Err(malformed("document describes more than one concordance")),
    }
}

fn import_extended(graph: &Graph, conc: SubjectRef<'_>) -> Result<Concordance, SkosError> {
    let source = scheme_vocab(
        graph,
        named(graph, conc, &ext("sourceScheme")).ok_or_else(|| malformed("concordance without xc:sourceScheme"))?,
    )?;
    let target = scheme_vocab(
        graph,
        named(graph, conc, &ext("targetScheme")).ok_or_else(|| malformed("concordance without xc:targetScheme"))?,
    )?;
    let metadata = ConcordanceMetadata {
        name: literal(graph, conc, &dcterms("title")).map(str::to_string),
        date: literal(graph, conc, &dcterms("date")).map(str::to_string),
    };

    let mut positioned: BTreeMap<u64, Mapping> = BTreeMap::new();
    for node in graph.subjects_for_predicate_object(rdf::TYPE, &ext("Mapping")) {
        let field = |name: &str| {
            literal(graph, node, &ext(name)).ok_or_else(|| malformed(format!("mapping without xc:{name}")))
        };
        let position: u64 = field("position")?
            .parse()
            .map_err(|_| malformed("xc:position is not an integer"))?;
        let predicate = named(graph, node, &ext("predicate")).ok_or_else(|| malformed("mapping without xc:predicate"))?;
        let relation = relation_for_predicate(predicate.as_str())?;
        let start = parse_concept(&source, field("subjectLabel")?)?;
        let end = match literal(graph, node, &ext("objectLabel")) {
            Some(label) => Some(parse_concept(&target, label)?),
            None => None,
        };
        let relevance: Relevance = field("relevance")?.parse()?;
        let provenance: Provenance = field("provenance")?.parse()?;
        let mapping = Mapping::new(start, relation, target.clone(), end, relevance, provenance)?;
        if positioned.insert(position, mapping).is_some() {
            return Err(malformed(format!("duplicate xc:position {position}")));
        }
    }
    let mut out = Concordance::with_mappings(ConcordanceKey::new(source, target), positioned.into_values().collect())
        .map_err(|e| malformed(e.to_string()))?;
    out.metadata = metadata;
    Ok(out)
}

fn import_plain(graph: &Graph) -> Result<Concordance, SkosError> {
    let concept = |node: NamedNodeRef<'_>| -> Result<Concept, SkosError> {
        let subject = SubjectRef::from(node);
        let scheme = named(graph, subject, &skos("inScheme"))
            .ok_or_else(|| malformed(format!("<{}> has no skos:inScheme", node.as_str())))?;
        let label = literal(graph, subject, &skos("prefLabel"))
            .ok_or_else(|| malformed(format!("<{}> has no skos:prefLabel", node.as_str())))?;
        Ok(parse_concept(&scheme_vocab(graph, scheme)?, label)?)
    };

    let mut rows = Vec::new();
    for t in graph.iter() {
        if !is_skos_mapping_property(t.predicate.as_str()) {
            continue;
        }
        let relation = relation_for_predicate(t.predicate.as_str())?;
        let (SubjectRef::NamedNode(s), TermRef::NamedNode(o)) = (t.subject, t.object) else {
            return Err(malformed("mapping triples must relate named concepts"));
        };
        rows.push((concept(s)?, relation, concept(o)?));
    }
    rows.sort_by_cached_key(|(s, r, o)| (s.canonical(), r.symbol(), o.canonical()));
    let Some((first_start, _, first_end)) = rows.first() else {
        return Err(malformed("no mapping triples found"));
    };
    let key = ConcordanceKey::new(first_start.vocabulary().clone(), first_end.vocabulary().clone());
    let mappings = rows
        .into_iter()
        .map(|(s, r, o)| {
            if s.vocabulary() != &key.source {
                return Err(malformed("mapping triples span more than one source vocabulary"));
            }
            Ok(Mapping::new(s, r, key.target.clone(), Some(o), PLAIN_SKOS_RELEVANCE, Provenance::Asserted)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Concordance::with_mappings(key, mappings).map_err(|e| malformed(e.to_string()))
}
