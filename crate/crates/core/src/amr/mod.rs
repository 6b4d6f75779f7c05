//! Abstract Meaning Representation graphs in PENMAN notation.
//!
//! An [`AmrGraph`] is a rooted, directed, acyclic graph whose nodes are
//! variables labelled with concepts, whose edges carry role labels such as
//! `:ARG0` or `:snt2`, and whose constant-valued roles (`:polarity -`,
//! `:op1 "Sesame"`, `:year 2012`) are kept apart as attributes.
//!
//! Graphs built through [`AmrGraph::new`] or [`parse`] are validated and
//! stored in a canonical order: nodes in depth-first discovery order and
//! edges in the order a depth-first walk emits them. Under that order the
//! first edge into a node is always the one that declares it when the graph
//! is printed, which is what makes [`serialize`] and [`parse`] exact inverses.

mod edit;
mod parse;
mod query;
mod serialize;
mod validate;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use edit::{clone_subgraph, fresh_variable, insert_sentence_subgraph, remove_subtree};
pub use parse::parse;
pub use query::{depth, find_nodes, is_predicate, sentence_units, NodePredicate, PronounInventory};
pub(crate) use query::{node_depths, role_in_family};
pub use serialize::{serialize, Style};
pub use validate::{validate, ValidationReport, Violation, ViolationCode};

/// Concept of the node grouping several sentences under `:snt1..:sntN`.
pub const MULTI_SENTENCE: &str = "multi-sentence";
/// Concept marking the questioned element of an interrogative.
pub const AMR_UNKNOWN: &str = "amr-unknown";
/// Role of the negation attribute.
pub const POLARITY: &str = ":polarity";

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AmrError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable `{0}` is declared more than once")]
    DuplicateVariable(String),
    #[error("reference to undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("cycle through variable `{0}`")]
    Cycle(String),
    #[error("cannot remove the root `{0}`")]
    RootRemoval(String),
    #[error("invalid graph: {0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub variable: String,
    pub concept: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub role: String,
    pub target: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantKind {
    /// Quoted string, printed with surrounding quotes.
    Text,
    Number,
    /// The bare `-` of `:polarity -`.
    MinusMarker,
    /// Unquoted symbolic value such as `imperative` in `:mode imperative`.
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constant {
    pub kind: ConstantKind,
    pub value: String,
}

impl Constant {
    pub fn text(value: impl Into<String>) -> Self {
        Constant { kind: ConstantKind::Text, value: value.into() }
    }

    pub fn number(value: impl Into<String>) -> Self {
        Constant { kind: ConstantKind::Number, value: value.into() }
    }

    pub fn minus() -> Self {
        Constant { kind: ConstantKind::MinusMarker, value: "-".to_string() }
    }

    pub fn symbol(value: impl Into<String>) -> Self {
        Constant { kind: ConstantKind::Symbol, value: value.into() }
    }

    pub fn is_minus(&self) -> bool {
        self.kind == ConstantKind::MinusMarker
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConstantKind::Text => {
                f.write_str("\"")?;
                for c in self.value.chars() {
                    if c == '"' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("\"")
            }
            _ => f.write_str(&self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Attribute {
    pub source: String,
    pub role: String,
    pub value: Constant,
}

/// A rooted semantic graph.
///
/// Values are immutable; every editing operation returns a new graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AmrGraph {
    root: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    attributes: Vec<Attribute>,
}

impl AmrGraph {
    /// Builds a graph, checks every invariant and puts it in canonical order.
    pub fn new(
        root: impl Into<String>,
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        attributes: Vec<Attribute>,
    ) -> Result<Self, AmrError> {
        let graph = AmrGraph::from_parts(root, nodes, edges, attributes);
        let report = validate(&graph);
        if !report.ok {
            return Err(AmrError::Invalid(report));
        }
        Ok(graph.canonicalized())
    }

    /// Assembles a graph without checking anything. The result may violate
    /// the invariants; run [`validate`] on it before relying on them.
    pub fn from_parts(root: impl Into<String>, nodes: Vec<Node>, edges: Vec<Edge>, attributes: Vec<Attribute>) -> Self {
        AmrGraph { root: root.into(), nodes, edges, attributes }
    }

    /// A graph with one node and nothing else.
    pub fn single(variable: impl Into<String>, concept: impl Into<String>) -> Self {
        let variable = variable.into();
        AmrGraph {
            root: variable.clone(),
            nodes: vec![Node { variable, concept: concept.into() }],
            edges: Vec::new(),
            attributes: Vec::new(),
        }
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn root_concept(&self) -> &str {
        self.concept(&self.root).unwrap_or_default()
    }

    pub fn concept(&self, variable: &str) -> Option<&str> {
        self.nodes.iter().find(|n| n.variable == variable).map(|n| n.concept.as_str())
    }

    pub fn contains(&self, variable: &str) -> bool {
        self.nodes.iter().any(|n| n.variable == variable)
    }

    pub fn is_multi_sentence(&self) -> bool {
        self.root_concept() == MULTI_SENTENCE
    }

    pub fn variables(&self) -> HashSet<&str> {
        self.nodes.iter().map(|n| n.variable.as_str()).collect()
    }

    pub fn outgoing<'a>(&'a self, variable: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.source == variable)
    }

    pub fn incoming<'a>(&'a self, variable: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.target == variable)
    }

    pub fn attributes_of<'a>(&'a self, variable: &'a str) -> impl Iterator<Item = &'a Attribute> + 'a {
        self.attributes.iter().filter(move |a| a.source == variable)
    }

    /// The edge that declares `variable` when the graph is printed.
    pub fn primary_edge(&self, variable: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.target == variable)
    }

    /// Whether `variable` carries a `:polarity -` attribute.
    pub fn is_negated(&self, variable: &str) -> bool {
        self.attributes_of(variable).any(|a| a.role == POLARITY && a.value.is_minus())
    }

    /// Copy of the graph with one node relabelled.
    pub fn with_concept(&self, variable: &str, concept: &str) -> Result<AmrGraph, AmrError> {
        if !self.contains(variable) {
            return Err(AmrError::UndeclaredVariable(variable.to_string()));
        }
        let mut next = self.clone();
        for node in next.nodes.iter_mut().filter(|n| n.variable == variable) {
            node.concept = concept.to_string();
        }
        Ok(next)
    }

    /// Copy of the graph with `:polarity -` toggled on `variable`: added when
    /// absent, removed when present.
    pub fn with_polarity_toggled(&self, variable: &str) -> Result<AmrGraph, AmrError> {
        if !self.contains(variable) {
            return Err(AmrError::UndeclaredVariable(variable.to_string()));
        }
        let mut next = self.clone();
        if self.is_negated(variable) {
            next.attributes.retain(|a| !(a.source == variable && a.role == POLARITY && a.value.is_minus()));
        } else {
            // Keep attributes grouped by source in canonical order.
            let at = next.attributes.iter().position(|a| a.source == variable).unwrap_or_else(|| {
                let rank = next.node_rank(variable);
                next.attributes.iter().position(|a| next.node_rank(&a.source) > rank).unwrap_or(next.attributes.len())
            });
            next.attributes.insert(
                at,
                Attribute { source: variable.to_string(), role: POLARITY.to_string(), value: Constant::minus() },
            );
        }
        Ok(next)
    }

    /// Single-line PENMAN with variables renamed `x1, x2, ...` in discovery
    /// order. Two graphs have equal canonical forms iff they are equal up to
    /// variable renaming.
    pub fn canonical_form(&self) -> String {
        let renames: std::collections::HashMap<&str, String> =
            self.nodes.iter().enumerate().map(|(i, n)| (n.variable.as_str(), format!("x{}", i + 1))).collect();
        let rename = |v: &str| renames.get(v).cloned().unwrap_or_else(|| v.to_string());
        let renamed = AmrGraph {
            root: rename(&self.root),
            nodes: self
                .nodes
                .iter()
                .map(|n| Node { variable: rename(&n.variable), concept: n.concept.clone() })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge { source: rename(&e.source), role: e.role.clone(), target: rename(&e.target) })
                .collect(),
            attributes: self
                .attributes
                .iter()
                .map(|a| Attribute { source: rename(&a.source), role: a.role.clone(), value: a.value.clone() })
                .collect(),
        };
        serialize::write_graph(&renamed, Style::SingleLine)
    }

    fn node_rank(&self, variable: &str) -> usize {
        self.nodes.iter().position(|n| n.variable == variable).unwrap_or(usize::MAX)
    }

    /// Reorders nodes, edges and attributes into depth-first order from the
    /// root. Assumes a valid graph.
    fn canonicalized(self) -> AmrGraph {
        let mut visited: HashSet<&str> = HashSet::new();
        let mut node_order: Vec<&str> = Vec::with_capacity(self.nodes.len());
        let mut edge_order: Vec<usize> = Vec::with_capacity(self.edges.len());
        // Explicit stack of (variable, next outgoing edge position).
        let out: Vec<Vec<usize>> = {
            let mut by_source: std::collections::HashMap<&str, Vec<usize>> = Default::default();
            for (i, e) in self.edges.iter().enumerate() {
                by_source.entry(e.source.as_str()).or_default().push(i);
            }
            self.nodes.iter().map(|n| by_source.remove(n.variable.as_str()).unwrap_or_default()).collect()
        };
        let index: std::collections::HashMap<&str, usize> =
            self.nodes.iter().enumerate().map(|(i, n)| (n.variable.as_str(), i)).collect();

        let mut stack: Vec<(usize, usize)> = Vec::new();
        if let Some(&r) = index.get(self.root.as_str()) {
            visited.insert(self.root.as_str());
            node_order.push(self.root.as_str());
            stack.push((r, 0));
        }
        while let Some(top) = stack.last_mut() {
            let (n, pos) = *top;
            if pos == out[n].len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let ei = out[n][pos];
            edge_order.push(ei);
            let target = self.edges[ei].target.as_str();
            if visited.insert(target) {
                node_order.push(target);
                stack.push((index[target], 0));
            }
        }

        let rank: std::collections::HashMap<&str, usize> =
            node_order.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut attributes: Vec<(usize, usize)> = self
            .attributes
            .iter()
            .enumerate()
            .map(|(i, a)| (rank.get(a.source.as_str()).copied().unwrap_or(usize::MAX), i))
            .collect();
        attributes.sort();

        AmrGraph {
            root: self.root.clone(),
            nodes: node_order.iter().map(|v| self.nodes[index[v]].clone()).collect(),
            edges: edge_order.iter().map(|&i| self.edges[i].clone()).collect(),
            attributes: attributes.iter().map(|&(_, i)| self.attributes[i].clone()).collect(),
        }
    }
}

/// Single-line PENMAN. For graphs that fail validation the output covers
/// only what is reachable from the root.
impl fmt::Display for AmrGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize::write_graph(self, Style::SingleLine))
    }
}

impl std::str::FromStr for AmrGraph {
    type Err = AmrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polarity_toggle_is_an_involution() {
        let g = parse("(s / seem-01 :ARG1 (r / realistic-03))").unwrap();
        let negated = g.with_polarity_toggled("s").unwrap();
        assert!(negated.is_negated("s"));
        assert_eq!(negated.to_string(), "(s / seem-01 :polarity - :ARG1 (r / realistic-03))");
        assert_eq!(negated.with_polarity_toggled("s").unwrap(), g);
    }

    #[test]
    fn polarity_attribute_lands_in_node_order() {
        let g = parse("(a / a-01 :ARG0 (b / b :op1 \"x\") :mod (c / c))").unwrap();
        let negated = g.with_polarity_toggled("a").unwrap();
        assert_eq!(negated.attributes()[0].source, "a");
        assert_eq!(parse(&negated.to_string()).unwrap(), negated);
    }

    #[test]
    fn canonical_form_ignores_variable_names() {
        let a = parse("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        let b = parse("(x / want-01 :ARG0 (y / boy) :ARG1 (z / go-02 :ARG0 y))").unwrap();
        assert_ne!(a, b);
        assert_eq!(a.canonical_form(), b.canonical_form());
    }

    #[test]
    fn with_concept_rejects_unknown_variable() {
        let g = AmrGraph::single("i", "i");
        assert_eq!(g.with_concept("q", "you"), Err(AmrError::UndeclaredVariable("q".into())));
        assert_eq!(g.with_concept("i", "you").unwrap().root_concept(), "you");
    }
}
