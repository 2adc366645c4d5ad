use std::fmt::Write;

use super::Store;

fn quoted(id: &str) -> String {
    format!("\"{}\"", id.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT rendering of the vocabulary network: one node per vocabulary, one
/// edge per directed concordance labelled with its mapping count.
pub fn export_graph(store: &Store) -> String {
    let mut out = String::from("digraph concordances {\n");
    for v in store.vocabularies() {
        writeln!(out, "  {};", quoted(v.as_str())).unwrap();
    }
    for c in store.concordances() {
        writeln!(
            out,
            "  {} -> {} [label=\"{}\"];",
            quoted(c.source().as_str()),
            quoted(c.target().as_str()),
            c.len()
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
