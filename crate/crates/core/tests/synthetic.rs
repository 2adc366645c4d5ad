use crosswalk_core::concordance::{RelationType, Store};
use crosswalk_core::synth;

#[test]
fn full_size_network_loads_with_exact_distribution() {
    let store = Store::load_tsv(synth::mappings_tsv(synth::KOMOHE_ROWS, 2008).as_bytes()).unwrap();
    assert_eq!(store.mapping_count(), synth::KOMOHE_ROWS);
    assert_eq!(store.vocabularies().count(), synth::VOCABULARIES);
    assert_eq!(store.concordances().len(), 2 * synth::BILATERAL + synth::UNIDIRECTIONAL);

    let stats = store.stats(None).unwrap();
    assert_eq!(stats.total, synth::KOMOHE_ROWS);
    for (relation, count) in synth::relation_counts(synth::KOMOHE_ROWS) {
        assert_eq!(stats.relation_counts[relation], count, "{relation}");
    }
    assert_eq!(stats.relation_fractions[RelationType::Equivalence], 0.45);
    assert_eq!(stats.relation_fractions[RelationType::Null], 0.12);
    assert_eq!(stats.n_start_concepts, synth::KOMOHE_ROWS);
    assert_eq!(stats.relations_per_start, 1.0);

    // every crosswalk gets a near-equal share of the rows
    let sizes: Vec<usize> = store.concordances().iter().map(|c| c.len()).collect();
    let (min, max) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
    assert!(max - min <= 1, "{min}..{max}");
}
