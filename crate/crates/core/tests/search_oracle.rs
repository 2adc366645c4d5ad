mod support;

use std::collections::BTreeSet;

use crosswalk_core::query::{parse_query, Node};
use crosswalk_core::search::{tokenize, Document, FieldScope, Index, DEFAULT_CUTOFF};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

fn ten_docs() -> Vec<Document> {
    let raw: [(&str, &str, &str, &[&str]); 10] = [
        ("d01", "Family life", "Kinship and family relations.", &["family", "social relations"]),
        ("d02", "War and peace", "", &["war"]),
        ("d03", "Peace research", "On peace.", &["peace", "research"]),
        ("d04", "Labour market policy", "Youth and labour.", &["labour market"]),
        ("d05", "Youth unemployment", "", &["youth", "unemployment"]),
        ("d06", "Migration", "Family migration.", &["migration", "family"]),
        ("d07", "Health policy", "", &[]),
        ("d08", "School", "Social relations at school.", &["school"]),
        ("d09", "Crime and media", "Media reports on crime.", &["crime", "media"]),
        ("d10", "City poverty", "", &["poverty", "city"]),
    ];
    raw.iter()
        .map(|(id, t, a, c)| Document::new(id, t, a, c, vid("B"), "en").unwrap())
        .collect()
}

#[test]
fn postings_match_linear_scan() {
    let docs = ten_docs();
    let index = Index::build(&docs).unwrap();
    let vocab: BTreeSet<String> = docs
        .iter()
        .flat_map(|d| {
            let mut toks = tokenize(&d.title);
            toks.extend(tokenize(&d.abstract_text));
            toks.extend(d.controlled_terms.iter().flat_map(|t| tokenize(t.normalized())));
            toks
        })
        .collect();
    assert_eq!(index.distinct_tokens(), vocab.len());
    for tok in &vocab {
        let expected: Vec<String> = oracle_leaf_set(&docs, tok, FieldScope::FreeText).into_iter().collect();
        assert_eq!(index.posting_docs(tok), expected, "token {tok}");
    }
}

#[test]
fn single_term_in_one_document() {
    let index = Index::build(&ten_docs()).unwrap();
    let list = index.search("q", &parse_query("poverty").unwrap().root, FieldScope::ControlledOnly, DEFAULT_CUTOFF);
    assert_eq!(ids(&list), ["d10"]);
}

#[test]
fn and_is_intersection_on_fixture() {
    let docs = ten_docs();
    let index = Index::build(&docs).unwrap();
    for (a, b) in [("family", "migration"), ("peace", "war"), ("social relations", "school"), ("youth", "labour")] {
        let qa = parse_query(a).unwrap().root;
        let qb = parse_query(b).unwrap().root;
        for scope in [FieldScope::ControlledOnly, FieldScope::FreeText] {
            let both = index.matches(&Node::And(vec![qa.clone(), qb.clone()]), scope);
            let expected: BTreeSet<String> =
                index.matches(&qa, scope).intersection(&index.matches(&qb, scope)).cloned().collect();
            assert_eq!(both, expected);
            assert_eq!(both, oracle_matches(&docs, &Node::And(vec![qa.clone(), qb.clone()]), scope));
        }
    }
}

#[test]
fn controlled_scope_ignores_abstracts() {
    let index = Index::build(&ten_docs()).unwrap();
    let q = parse_query("kinship").unwrap().root;
    assert!(index.matches(&q, FieldScope::ControlledOnly).is_empty());
    assert_eq!(index.matches(&q, FieldScope::FreeText).len(), 1);
}

#[test]
fn ranking_matches_oracle_on_fixture() {
    let docs = ten_docs();
    let index = Index::build(&docs).unwrap();
    let q = parse_query("family OR peace OR \"social relations\"").unwrap().root;
    let list = index.search("q", &q, FieldScope::FreeText, DEFAULT_CUTOFF);
    let got: Vec<(String, f64)> = list.hits.iter().map(|h| (h.doc_id.clone(), h.score)).collect();
    assert_eq!(got, oracle_ranking(&docs, &q, FieldScope::FreeText, DEFAULT_CUTOFF));
}

#[test]
fn concurrent_searches_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let docs = random_corpus(&mut rng, 100);
    let index = Index::build(&docs).unwrap();
    let queries: Vec<Node> = (0..50).map(|_| random_tree(&mut rng, 4)).collect();
    let run = |qs: &[Node]| {
        qs.iter()
            .enumerate()
            .map(|(i, q)| index.search(&i.to_string(), q, FieldScope::FreeText, 30))
            .collect::<Vec<_>>()
    };
    let serial = run(&queries);
    let threaded: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..4).map(|_| s.spawn(|| run(&queries))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for t in threaded {
        assert_eq!(t, serial);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boolean_match_sets_equal_set_algebra(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, 100);
        let index = Index::build(&docs).unwrap();
        let q1 = random_tree(&mut rng, 3);
        let q2 = random_tree(&mut rng, 3);
        for scope in [FieldScope::ControlledOnly, FieldScope::FreeText] {
            let (m1, m2) = (index.matches(&q1, scope), index.matches(&q2, scope));
            prop_assert_eq!(&m1, &oracle_matches(&docs, &q1, scope));
            let or = index.matches(&Node::Or(vec![q1.clone(), q2.clone()]), scope);
            prop_assert_eq!(or, m1.union(&m2).cloned().collect::<BTreeSet<_>>());
            let and = index.matches(&Node::And(vec![q1.clone(), q2.clone()]), scope);
            prop_assert_eq!(and, m1.intersection(&m2).cloned().collect::<BTreeSet<_>>());
        }
    }

    #[test]
    fn controlled_matches_are_a_subset_of_free_text(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, 60);
        let index = Index::build(&docs).unwrap();
        let q = random_tree(&mut rng, 4);
        let controlled = index.matches(&q, FieldScope::ControlledOnly);
        prop_assert!(controlled.is_subset(&index.matches(&q, FieldScope::FreeText)));
    }

    #[test]
    fn ranked_lists_follow_the_oracle(seed in any::<u64>(), cutoff in 0usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let docs = random_corpus(&mut rng, 80);
        let index = Index::build(&docs).unwrap();
        let q = random_tree(&mut rng, 4);
        let list = index.search("q", &q, FieldScope::FreeText, cutoff);
        let matched = index.matches(&q, FieldScope::FreeText);
        prop_assert_eq!(list.hits.len(), cutoff.min(matched.len()));
        prop_assert!(list.hits.windows(2).all(|w| w[0].score > w[1].score
            || (w[0].score == w[1].score && w[0].doc_id < w[1].doc_id)));
        let got: Vec<(String, f64)> = list.hits.iter().map(|h| (h.doc_id.clone(), h.score)).collect();
        prop_assert_eq!(got, oracle_ranking(&docs, &q, FieldScope::FreeText, cutoff));
    }
}
