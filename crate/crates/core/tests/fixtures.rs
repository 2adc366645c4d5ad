mod support;

use std::collections::BTreeSet;

use crosswalk_core::concordance::{
    export_skos, import_skos, write_tsv, Concordance, MappingFilter, RelationType, Relevance, Store,
};
use crosswalk_core::kos::{normalize_term, ConceptKey};
use crosswalk_core::query::{expand_append, parse_query, render_query, translate_replace, AppendOptions};
use support::{fixture_text, vid};

fn load(name: &str) -> Store {
    Store::load_tsv(fixture_text(name).as_bytes()).unwrap()
}

/// `(end vocab, relation symbol, end text)` for every mapping of a start term.
fn lookup(store: &Store, vocab: &str, term: &str) -> BTreeSet<(String, String, String)> {
    let key = ConceptKey::single(&normalize_term(term).unwrap());
    store
        .query_mappings(vocab, &key, &MappingFilter::default())
        .unwrap()
        .into_iter()
        .map(|m| {
            (
                m.target().to_string(),
                m.relation().symbol().to_string(),
                m.end().map(|e| e.canonical()).unwrap_or_default(),
            )
        })
        .collect()
}

fn rows(expected: &[(&str, &str, &str)]) -> BTreeSet<(String, String, String)> {
    expected
        .iter()
        .map(|(v, r, e)| (v.to_string(), r.to_string(), e.to_string()))
        .collect()
}

#[test]
fn thesoz_weiterbildung() {
    let store = load("thesoz_network.tsv");
    let expected = rows(&[
        ("PSYNDEX", "=", "weiterbildung"),
        ("STW", "=", "weiterbildung"),
        ("INFODATA", "=", "weiterbildung"),
        ("SWD", "=", "weiterbildung"),
        ("BISP", "=", "weiterbildung"),
        ("DZI", "=", "weiterbildung"),
        ("FES", "^", "berufsbildung"),
        ("CSA-ASSIA", "=", "further education"),
        ("CSA-PEI", "=", "continuing education"),
        ("CSA-SA", "=", "adult education"),
        ("CSA-WPSA", "<", "education"),
        ("IBLK", "=", "erwachsenenbildung"),
    ]);
    assert_eq!(lookup(&store, "THESOZ", "Weiterbildung"), expected);
    // case and spacing variants hit the same concept
    assert_eq!(lookup(&store, "THESOZ", "  WEITERBILDUNG "), expected);
}

#[test]
fn thesoz_meinungsforschung() {
    let store = load("thesoz_network.tsv");
    let expected = rows(&[
        ("PSYNDEX", "0", ""),
        ("IAB", "^", "einstellungsforschung"),
        ("CSA-ASSIA", "=", "opinion polls"),
        ("CSA-SA", "=", "opinions + research"),
        ("CSA-PEI", "<", "research"),
        ("CSA-WPSA", "=", "public opinion research"),
        ("ELSST", "=", "public opinion polls"),
        ("IBLK", "=", "meinungsumfrage/meinungsforschung"),
    ]);
    assert_eq!(lookup(&store, "THESOZ", "Meinungsforschung"), expected);
}

#[test]
fn thesoz_filtered_lookup() {
    let store = load("thesoz_network.tsv");
    let key = ConceptKey::single(&normalize_term("weiterbildung").unwrap());
    let filter = MappingFilter::default().target(vid("CSA-ASSIA"));
    let found = store.query_mappings("THESOZ", &key, &filter).unwrap();
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].relation(), RelationType::Equivalence);
    assert_eq!(found[0].end().unwrap().display_text(), "Further education");
    assert!(store.query_mappings("NOPE", &key, &filter).is_err());
}

#[test]
fn relation_kinds_relations() {
    let store = load("relation_kinds.tsv");
    assert_eq!(
        lookup(&store, "A", "hacker"),
        rows(&[("B", "=", "hacking"), ("B", "^", "computers + crime"), ("B", "^", "internet + security")])
    );
    assert_eq!(lookup(&store, "A", "isdn device"), rows(&[("B", "0", "")]));
    assert_eq!(lookup(&store, "A", "isdn"), rows(&[("B", "<", "telecommunications")]));
    assert_eq!(lookup(&store, "A", "documentation system"), rows(&[("B", ">", "abstracting services")]));
}

#[test]
fn relation_kinds_stats() {
    let stats = load("relation_kinds.tsv").stats(None).unwrap();
    let counts: Vec<(RelationType, usize)> = RelationType::ALL.iter().map(|&r| (r, stats.relation_counts[r])).collect();
    assert_eq!(
        counts,
        [
            (RelationType::Equivalence, 1),
            (RelationType::Broader, 1),
            (RelationType::Narrower, 1),
            (RelationType::Related, 2),
            (RelationType::Null, 1),
        ]
    );
    assert_eq!(stats.total, 6);
    assert_eq!(stats.n_start_concepts, 4);
}

#[test]
fn family_worked_example() {
    let store = load("family.tsv");
    let q = parse_query("Family relations").unwrap().tagged(vid("A"));
    let key = store.resolve_concordance("A-B").unwrap();
    let replaced = translate_replace(&q, &store, &key).unwrap();
    assert_eq!(render_query(&replaced.query.root), "Family AND social relations");
    let appended = expand_append(&q, &store, &AppendOptions::default());
    assert_eq!(render_query(&appended.query.root), "Family relations OR (Family AND social relations)");
}

fn mapping_set(c: &Concordance) -> BTreeSet<String> {
    c.mappings()
        .iter()
        .map(|m| {
            format!(
                "{}|{}|{}|{}|{}|{}",
                m.start().canonical(),
                m.relation(),
                m.target(),
                m.end().map(|e| e.canonical()).unwrap_or_default(),
                m.relevance(),
                m.provenance().as_str()
            )
        })
        .collect()
}

#[test]
fn skos_roundtrip_of_every_fixture() {
    let mut checked = 0;
    for name in ["family.tsv", "thesoz_network.tsv", "relation_kinds.tsv", "eval/mappings.tsv"] {
        let store = load(name);
        for c in store.concordances() {
            let back = import_skos(&export_skos(c)).unwrap();
            assert_eq!(back.key(), c.key(), "{name}");
            assert_eq!(mapping_set(&back), mapping_set(c), "{name} {}", c.key());
            checked += 1;
        }
    }
    assert!(checked >= 17);
}

#[test]
fn skos_roundtrip_keeps_null_and_ratings() {
    let store = load("relation_kinds.tsv");
    let c = &store.concordances()[0];
    let back = import_skos(&export_skos(c)).unwrap();
    let null = back.mappings().iter().find(|m| m.relation() == RelationType::Null).unwrap();
    assert_eq!(null.relevance(), Relevance::None);
    assert!(null.end().is_none());
    assert_eq!(write_tsv([&back]), write_tsv([c]));
}

#[test]
fn pivot_composition_over_thesoz_network() {
    // THESOZ -> CSA-SA -> X with a second hop added by hand
    let text = format!(
        "{}\nCSA-SA\tAdult Education\t=\tX\tadult learning\tmedium\nCSA-SA\tOpinions + Research\t<\tX\tsurveys\tlow\n",
        fixture_text("thesoz_network.tsv").trim_end()
    );
    let store = Store::load_tsv(text.as_bytes()).unwrap();
    let derived = store.compose_pivot(&vid("THESOZ"), &vid("CSA-SA"), &vid("X")).unwrap();
    let got = mapping_set(&derived);
    assert_eq!(
        got,
        BTreeSet::from([
            "weiterbildung|=|X|adult learning|medium|derived_via_pivot".to_string(),
            "meinungsforschung|<|X|surveys|low|derived_via_pivot".to_string(),
        ])
    );
    let back = import_skos(&export_skos(&derived)).unwrap();
    assert_eq!(mapping_set(&back), got);
}
