//! Controlled vocabularies, normalized terms and concepts.
//!
//! A [`Concept`] is either a single [`Term`] or a pre-coordinated term
//! combination such as `computers + crime`. Combinations are stored as
//! concepts in their own right so they can be mapping endpoints.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::io::BufRead;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Delimiter between the terms of a combination in every textual encoding.
pub const COMBINATION_DELIMITER: &str = " + ";

/// Header of the vocabulary registry file.
pub const REGISTRY_HEADER: &str = "id\tdisplay_name\tlanguage\tkind";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KosError {
    #[error("term is empty after normalization")]
    EmptyTerm,
    #[error("duplicate term {0:?} in combination")]
    DuplicateTermInCombination(String),
    #[error("term {0:?} contains a literal '+'")]
    PlusInTerm(String),
    #[error("invalid vocabulary id {0:?}")]
    InvalidVocabularyId(String),
    #[error("invalid language tag {0:?}")]
    InvalidLanguage(String),
    #[error("unknown vocabulary kind {0:?}")]
    UnknownKind(String),
    #[error("vocabulary {0} is already registered with different metadata")]
    ConflictingVocabulary(String),
    #[error("registry line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Identifier of a controlled vocabulary, e.g. `THESOZ` or `CSA-SA`.
///
/// Cheap to clone; every concept carries one.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VocabId(Arc<str>);

impl VocabId {
    pub fn new(id: &str) -> Result<Self, KosError> {
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(KosError::InvalidVocabularyId(id.to_string()));
        }
        Ok(VocabId(Arc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VocabId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VocabId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl FromStr for VocabId {
    type Err = KosError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VocabId::new(s)
    }
}

impl Borrow<str> for VocabId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl Serialize for VocabId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for VocabId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        VocabId::new(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabularyKind {
    Thesaurus,
    DescriptorList,
    Classification,
    SubjectHeadings,
}

impl VocabularyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VocabularyKind::Thesaurus => "thesaurus",
            VocabularyKind::DescriptorList => "descriptor_list",
            VocabularyKind::Classification => "classification",
            VocabularyKind::SubjectHeadings => "subject_headings",
        }
    }
}

impl FromStr for VocabularyKind {
    type Err = KosError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "thesaurus" => Ok(VocabularyKind::Thesaurus),
            "descriptor_list" => Ok(VocabularyKind::DescriptorList),
            "classification" => Ok(VocabularyKind::Classification),
            "subject_headings" => Ok(VocabularyKind::SubjectHeadings),
            other => Err(KosError::UnknownKind(other.to_string())),
        }
    }
}

/// Metadata record of one controlled vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub id: VocabId,
    pub display_name: String,
    pub language: String,
    pub kind: VocabularyKind,
}

impl Vocabulary {
    pub fn new(
        id: &str,
        display_name: &str,
        language: &str,
        kind: VocabularyKind,
    ) -> Result<Self, KosError> {
        if !is_language_tag(language) {
            return Err(KosError::InvalidLanguage(language.to_string()));
        }
        Ok(Vocabulary {
            id: VocabId::new(id)?,
            display_name: display_name.to_string(),
            language: language.to_string(),
            kind,
        })
    }
}

// Shape check only: subtags of 1-8 ASCII alphanumerics separated by '-'.
fn is_language_tag(tag: &str) -> bool {
    !tag.is_empty()
        && tag
            .split('-')
            .all(|sub| (1..=8).contains(&sub.len()) && sub.bytes().all(|b| b.is_ascii_alphanumeric()))
}

/// A controlled-vocabulary term with its canonical form.
///
/// Equality, ordering and hashing look at the normalized form only; the raw
/// string is kept for display.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Term {
    raw: String,
    normalized: String,
}

impl Term {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn normalized(&self) -> &str {
        &self.normalized
    }

    /// Number of whitespace-separated words in the normalized form.
    pub fn word_count(&self) -> usize {
        self.normalized.split(' ').count()
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.normalized == other.normalized
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.normalized.hash(state);
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.normalized.cmp(&other.normalized)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// Canonical form used for every term comparison: NFC, lowercase,
/// whitespace trimmed and collapsed to single spaces.
///
/// Lowercasing is the per-character Unicode lowercase mapping, so no
/// language-specific folding happens (`ß` stays `ß`).
pub fn normalize_text(raw: &str) -> String {
    let lowered: String = raw.nfc().flat_map(char::to_lowercase).collect();
    let recomposed: String = lowered.nfc().collect();
    let mut out = String::with_capacity(recomposed.len());
    for word in recomposed.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

pub fn normalize_term(raw: &str) -> Result<Term, KosError> {
    let normalized = normalize_text(raw);
    if normalized.is_empty() {
        return Err(KosError::EmptyTerm);
    }
    Ok(Term {
        raw: raw.to_string(),
        normalized,
    })
}

/// Order-insensitive lookup key of a concept: its sorted normalized terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConceptKey(Vec<String>);

impl ConceptKey {
    pub fn single(term: &Term) -> Self {
        ConceptKey(vec![term.normalized.clone()])
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Self {
        let mut v: Vec<String> = terms.into_iter().map(|t| t.normalized.clone()).collect();
        v.sort();
        ConceptKey(v)
    }

    pub fn terms(&self) -> &[String] {
        &self.0
    }
}

/// A single term or a term combination within one vocabulary.
///
/// Equality and hashing are order-insensitive on the normalized term set.
#[derive(Debug, Clone)]
pub struct Concept {
    vocabulary: VocabId,
    terms: Vec<Term>,
}

impl Concept {
    pub fn new(vocabulary: VocabId, terms: Vec<Term>) -> Result<Self, KosError> {
        if terms.is_empty() {
            return Err(KosError::EmptyTerm);
        }
        for (i, t) in terms.iter().enumerate() {
            if t.normalized.contains('+') {
                return Err(KosError::PlusInTerm(t.raw.clone()));
            }
            if terms[..i].iter().any(|u| u == t) {
                return Err(KosError::DuplicateTermInCombination(t.normalized.clone()));
            }
        }
        Ok(Concept { vocabulary, terms })
    }

    pub fn single(vocabulary: VocabId, term: Term) -> Result<Self, KosError> {
        Concept::new(vocabulary, vec![term])
    }

    pub fn vocabulary(&self) -> &VocabId {
        &self.vocabulary
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_combination(&self) -> bool {
        self.terms.len() > 1
    }

    pub fn key(&self) -> ConceptKey {
        ConceptKey::from_terms(&self.terms)
    }

    /// Normalized terms joined by `" + "` in stored order.
    pub fn canonical(&self) -> String {
        join_terms(self.terms.iter().map(Term::normalized))
    }

    /// Raw terms joined by `" + "` in stored order.
    pub fn display_text(&self) -> String {
        join_terms(self.terms.iter().map(Term::raw))
    }
}

fn join_terms<'a>(parts: impl Iterator<Item = &'a str>) -> String {
    parts.collect::<Vec<_>>().join(COMBINATION_DELIMITER)
}

impl PartialEq for Concept {
    fn eq(&self, other: &Self) -> bool {
        self.vocabulary == other.vocabulary && self.key() == other.key()
    }
}

impl Eq for Concept {}

impl Hash for Concept {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.vocabulary.hash(state);
        self.key().hash(state);
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_text())
    }
}

/// Parses the textual concept encoding, e.g. `computers + crime`.
pub fn parse_concept(vocab: &VocabId, text: &str) -> Result<Concept, KosError> {
    let terms = text
        .split(COMBINATION_DELIMITER)
        .map(|fragment| {
            let term = normalize_term(fragment)?;
            if term.normalized.contains('+') {
                return Err(KosError::PlusInTerm(fragment.to_string()));
            }
            Ok(term)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Concept::new(vocab.clone(), terms)
}

/// Registry of vocabulary records, keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    vocabularies: BTreeMap<VocabId, Vocabulary>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `vocab`; an identical re-registration is a no-op.
    pub fn register(&mut self, vocab: Vocabulary) -> Result<(), KosError> {
        match self.vocabularies.get(&vocab.id) {
            Some(existing) if *existing == vocab => Ok(()),
            Some(_) => Err(KosError::ConflictingVocabulary(vocab.id.to_string())),
            None => {
                self.vocabularies.insert(vocab.id.clone(), vocab);
                Ok(())
            }
        }
    }

    pub fn get(&self, id: &str) -> Option<&Vocabulary> {
        self.vocabularies.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vocabularies.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.vocabularies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabularies.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vocabulary> {
        self.vocabularies.values()
    }

    /// Reads a registry TSV file with header `id	display_name	language	kind`.
    pub fn from_tsv<R: BufRead>(reader: R) -> Result<Self, KosError> {
        let mut registry = Registry::new();
        let mut lines = reader.lines().enumerate();
        let parse_err = |line: usize, message: String| KosError::Parse { line, message };
        match lines.next() {
            Some((_, Ok(header))) if header == REGISTRY_HEADER => {}
            Some((_, Ok(header))) => {
                return Err(parse_err(1, format!("unexpected header {header:?}")));
            }
            Some((_, Err(e))) => return Err(parse_err(1, e.to_string())),
            None => return Err(parse_err(1, "missing header".to_string())),
        }
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(parse_err(lineno, format!("expected 4 columns, found {}", cols.len())));
            }
            let kind = cols[3]
                .parse::<VocabularyKind>()
                .map_err(|e| parse_err(lineno, e.to_string()))?;
            let vocab = Vocabulary::new(cols[0], cols[1], cols[2], kind)
                .map_err(|e| parse_err(lineno, e.to_string()))?;
            registry.register(vocab).map_err(|e| parse_err(lineno, e.to_string()))?;
        }
        Ok(registry)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(REGISTRY_HEADER);
        out.push('\n');
        for v in self.vocabularies.values() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                v.id,
                v.display_name,
                v.language,
                v.kind.as_str()
            ));
        }
        out
    }
}
