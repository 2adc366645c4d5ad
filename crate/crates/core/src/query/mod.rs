//! Boolean queries over controlled terms and their expansion through
//! cross-concordances.
//!
//! Grammar: terms and double-quoted phrases, infix `AND` / `OR`
//! (case-insensitive), parentheses, `AND` binding tighter than `OR`. A run of
//! bare words between operators is one multi-word leaf, so
//! `Family AND social relations` has two leaves. Adjacent groups or quoted
//! phrases are joined by an implicit `AND`. `NOT` is not supported.

mod expand;
mod parser;

use std::fmt;

use crate::kos::{Concept, Term, VocabId};

pub use expand::{
    expand_append, translate_replace, AppendOptions, ExpandError, ExpansionResult, SubstitutedConcept, Substitution,
};
pub use parser::{parse_query, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    /// A single word.
    Term(Term),
    /// Several words matched as consecutive tokens.
    Phrase(Term),
    And(Vec<Node>),
    Or(Vec<Node>),
}

impl Node {
    pub fn leaf(term: Term) -> Node {
        if term.word_count() > 1 {
            Node::Phrase(term)
        } else {
            Node::Term(term)
        }
    }

    /// `And` of the given nodes; a single node is returned unwrapped.
    pub fn and(mut children: Vec<Node>) -> Node {
        assert!(!children.is_empty(), "And needs at least one child");
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Node::And(children)
        }
    }

    /// `Or` of the given nodes; a single node is returned unwrapped.
    pub fn or(mut children: Vec<Node>) -> Node {
        assert!(!children.is_empty(), "Or needs at least one child");
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            Node::Or(children)
        }
    }

    /// Node for a mapped concept: a term combination becomes an `And` group.
    pub fn concept(concept: &Concept) -> Node {
        Node::and(concept.terms().iter().cloned().map(Node::leaf).collect())
    }

    pub fn term(&self) -> Option<&Term> {
        match self {
            Node::Term(t) | Node::Phrase(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.term().is_some()
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::And(c) | Node::Or(c) => c,
            _ => &[],
        }
    }

    /// Leaf terms in left-to-right order.
    pub fn leaves(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Term>) {
        match self {
            Node::Term(t) | Node::Phrase(t) => out.push(t),
            Node::And(c) | Node::Or(c) => c.iter().for_each(|n| n.collect_leaves(out)),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Node::depth).max().unwrap_or(0)
    }

    /// Associative normal form: nested groups of the same operator are
    /// merged into their parent.
    pub fn normalized(&self) -> Node {
        fn flatten(children: &[Node], is_and: bool) -> Vec<Node> {
            let mut out = Vec::with_capacity(children.len());
            for child in children.iter().map(Node::normalized) {
                match child {
                    Node::And(grand) if is_and => out.extend(grand),
                    Node::Or(grand) if !is_and => out.extend(grand),
                    other => out.push(other),
                }
            }
            out
        }
        match self {
            Node::Term(_) | Node::Phrase(_) => self.clone(),
            Node::And(c) => Node::And(flatten(c, true)),
            Node::Or(c) => Node::Or(flatten(c, false)),
        }
    }
}

/// A parsed query, optionally tagged with the vocabulary its terms come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanQuery {
    pub root: Node,
    pub vocabulary: Option<VocabId>,
}

impl BooleanQuery {
    pub fn new(root: Node) -> Self {
        BooleanQuery { root, vocabulary: None }
    }

    pub fn tagged(mut self, vocabulary: VocabId) -> Self {
        self.vocabulary = Some(vocabulary);
        self
    }
}

impl fmt::Display for BooleanQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_query(&self.root))
    }
}

fn is_keyword(word: &str) -> bool {
    word.eq_ignore_ascii_case("and") || word.eq_ignore_ascii_case("or")
}

fn render_leaf(term: &Term, out: &mut String) {
    let words: Vec<&str> = term.raw().split_whitespace().collect();
    let bare = words
        .iter()
        .all(|w| !is_keyword(w) && !w.contains(['(', ')', '"']));
    if bare {
        out.push_str(&words.join(" "));
    } else {
        out.push('"');
        for c in words.join(" ").chars() {
            if matches!(c, '"' | '\\') {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('"');
    }
}

fn render_node(node: &Node, nested: bool, out: &mut String) {
    let (children, op) = match node {
        Node::Term(t) | Node::Phrase(t) => return render_leaf(t, out),
        Node::And(c) => (c, " AND "),
        Node::Or(c) => (c, " OR "),
    };
    if nested {
        out.push('(');
    }
    for (i, child) in children.iter().enumerate() {
        if i > 0 {
            out.push_str(op);
        }
        render_node(child, true, out);
    }
    if nested {
        out.push(')');
    }
}

/// Canonical text: uppercase operators, parentheses around every nested
/// group, leaves shown with their original spelling.
pub fn render_query(node: &Node) -> String {
    let mut out = String::new();
    render_node(&node.normalized(), false, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kos::normalize_term;
    use proptest::prelude::*;

    fn leaf(s: &str) -> Node {
        Node::leaf(normalize_term(s).unwrap())
    }

    #[test]
    fn renders_worked_example() {
        let q = Node::Or(vec![
            leaf("Family relations"),
            Node::And(vec![leaf("Family"), leaf("social relations")]),
        ]);
        assert_eq!(render_query(&q), "Family relations OR (Family AND social relations)");
        assert_eq!(render_query(&leaf("hacker")), "hacker");
    }

    #[test]
    fn nested_same_operator_is_flattened() {
        let q = Node::And(vec![leaf("a"), Node::And(vec![leaf("b"), leaf("c")])]);
        assert_eq!(render_query(&q), "a AND b AND c");
        let q = Node::And(vec![Node::Or(vec![leaf("a"), leaf("x")]), leaf("b")]);
        assert_eq!(render_query(&q), "(a OR x) AND b");
    }

    #[test]
    fn leaves_needing_quotes() {
        assert_eq!(render_query(&leaf("rock and roll")), "\"rock and roll\"");
        assert_eq!(render_query(&leaf("education (adult)")), "\"education (adult)\"");
        assert_eq!(render_query(&leaf("say \"hi\"")), "\"say \\\"hi\\\"\"");
        assert_eq!(render_query(&leaf("  Public   Opinion Polls ")), "Public Opinion Polls");
    }

    #[test]
    fn leaf_kinds_follow_word_count() {
        assert!(matches!(leaf("isdn"), Node::Term(_)));
        assert!(matches!(leaf("isdn device"), Node::Phrase(_)));
        assert_eq!(Node::concept(&crate::kos::parse_concept(&VocabId::new("B").unwrap(), "family + social relations").unwrap()).depth(), 2);
    }

    fn arb_word() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-zA-Z]{1,8}",
            Just("and".to_string()),
            Just("Or".to_string()),
            "[a-z]{1,4}[()\"\\\\/-][a-z]{0,3}",
        ]
    }

    pub(crate) fn arb_node() -> impl Strategy<Value = Node> {
        let leaf = proptest::collection::vec(arb_word(), 1..4)
            .prop_map(|ws| Node::leaf(normalize_term(&ws.join(" ")).unwrap()));
        leaf.prop_recursive(4, 32, 4, |inner| {
            prop_oneof![
                proptest::collection::vec(inner.clone(), 2..4).prop_map(Node::And),
                proptest::collection::vec(inner, 2..4).prop_map(Node::Or),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_render_roundtrip(node in arb_node()) {
            let text = render_query(&node);
            let parsed = parse_query(&text).unwrap();
            prop_assert_eq!(&parsed.root, &node.normalized());
            prop_assert_eq!(render_query(&parsed.root), text);
        }
    }
}
