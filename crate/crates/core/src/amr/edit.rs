//! Structural edits. Every function here takes a valid graph and returns a
//! new valid graph.

use std::collections::{HashMap, HashSet};

use super::query::role_in_family;
use super::{validate, AmrError, AmrGraph, Attribute, Edge, Node, MULTI_SENTENCE};

/// A variable for `concept` not in `used`: the concept's first letter, then
/// the same letter with suffix 2, 3, ... (`h`, `h2`, `h3`).
pub fn fresh_variable(concept: &str, used: &HashSet<String>) -> String {
    let base = concept.chars().next().filter(char::is_ascii_alphabetic).map_or('x', |c| c.to_ascii_lowercase());
    let base = base.to_string();
    if !used.contains(&base) {
        return base;
    }
    (2..).map(|k| format!("{base}{k}")).find(|v| !used.contains(v)).expect("unbounded suffixes")
}

fn ensure_valid(graph: &AmrGraph) -> Result<(), AmrError> {
    let report = validate(graph);
    if report.ok {
        Ok(())
    } else {
        Err(AmrError::Invalid(report))
    }
}

fn reachable_from<'a>(graph: &'a AmrGraph, start: &'a str, skip_edge: Option<usize>) -> Vec<&'a str> {
    let mut seen: HashSet<&str> = HashSet::from([start]);
    let mut order = vec![start];
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        let mut next = Vec::new();
        for (i, e) in graph.edges().iter().enumerate() {
            if e.source == v && Some(i) != skip_edge && seen.insert(e.target.as_str()) {
                order.push(e.target.as_str());
                next.push(e.target.as_str());
            }
        }
        stack.extend(next.into_iter().rev());
    }
    order
}

/// Renames every variable of `graph` to one fresh with respect to `used`,
/// extending `used` as it goes. Returns the renamed parts in stored order.
fn rename_fresh(graph: &AmrGraph, used: &mut HashSet<String>) -> (String, Vec<Node>, Vec<Edge>, Vec<Attribute>) {
    let mut map: HashMap<&str, String> = HashMap::new();
    for node in graph.nodes() {
        let fresh = fresh_variable(&node.concept, used);
        used.insert(fresh.clone());
        map.insert(node.variable.as_str(), fresh);
    }
    let nodes = graph
        .nodes()
        .iter()
        .map(|n| Node { variable: map[n.variable.as_str()].clone(), concept: n.concept.clone() })
        .collect();
    let edges = graph
        .edges()
        .iter()
        .map(|e| Edge {
            source: map[e.source.as_str()].clone(),
            role: e.role.clone(),
            target: map[e.target.as_str()].clone(),
        })
        .collect();
    let attributes = graph
        .attributes()
        .iter()
        .map(|a| Attribute { source: map[a.source.as_str()].clone(), role: a.role.clone(), value: a.value.clone() })
        .collect();
    (map[graph.root()].clone(), nodes, edges, attributes)
}

/// Copies everything reachable from `at` into a standalone graph whose
/// variables are all fresh with respect to `graph`.
///
/// Nodes reached through a reentrancy are copied too, so the copy never
/// refers back into the original.
pub fn clone_subgraph(graph: &AmrGraph, at: &str) -> Result<AmrGraph, AmrError> {
    ensure_valid(graph)?;
    if !graph.contains(at) {
        return Err(AmrError::UndeclaredVariable(at.to_string()));
    }
    let members: HashSet<&str> = reachable_from(graph, at, None).into_iter().collect();
    let sub = AmrGraph::new(
        at,
        graph.nodes().iter().filter(|n| members.contains(n.variable.as_str())).cloned().collect(),
        graph.edges().iter().filter(|e| members.contains(e.source.as_str())).cloned().collect(),
        graph.attributes().iter().filter(|a| members.contains(a.source.as_str())).cloned().collect(),
    )?;
    let mut used: HashSet<String> = graph.nodes().iter().map(|n| n.variable.clone()).collect();
    let (root, nodes, edges, attributes) = rename_fresh(&sub, &mut used);
    AmrGraph::new(root, nodes, edges, attributes)
}

/// Detaches `at` from the parent that declares it and drops everything no
/// longer reachable from the root.
///
/// Nodes under `at` that are still referenced from the surviving part keep
/// their declaration, which moves to their first remaining mention. When
/// `at` hung off a `multi-sentence` node by `:sntK`, the remaining `:snt`
/// roles of that node are renumbered `1..n` in their original order.
pub fn remove_subtree(graph: &AmrGraph, at: &str) -> Result<AmrGraph, AmrError> {
    ensure_valid(graph)?;
    if !graph.contains(at) {
        return Err(AmrError::UndeclaredVariable(at.to_string()));
    }
    if at == graph.root() {
        return Err(AmrError::RootRemoval(at.to_string()));
    }
    let primary =
        graph.edges().iter().position(|e| e.target == at).expect("a valid non-root node has an incoming edge");
    let parent = &graph.edges()[primary];
    let survivors: HashSet<&str> = reachable_from(graph, graph.root(), Some(primary)).into_iter().collect();

    let mut edges: Vec<Edge> = graph
        .edges()
        .iter()
        .enumerate()
        .filter(|&(i, e)| i != primary && survivors.contains(e.source.as_str()))
        .map(|(_, e)| e.clone())
        .collect();

    if graph.concept(&parent.source) == Some(MULTI_SENTENCE) && role_in_family(&parent.role, ":snt") {
        let mut indices: Vec<(u64, usize)> = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.source == parent.source && role_in_family(&e.role, ":snt"))
            .map(|(i, e)| (e.role[4..].parse().unwrap_or(u64::MAX), i))
            .collect();
        indices.sort();
        for (rank, (_, i)) in indices.into_iter().enumerate() {
            edges[i].role = format!(":snt{}", rank + 1);
        }
    }

    AmrGraph::new(
        graph.root(),
        graph.nodes().iter().filter(|n| survivors.contains(n.variable.as_str())).cloned().collect(),
        edges,
        graph.attributes().iter().filter(|a| survivors.contains(a.source.as_str())).cloned().collect(),
    )
}

/// Adds `sentence` as a new sentence of `graph`.
///
/// A `multi-sentence` root gains the next `:sntK`; any other root is wrapped
/// in a fresh `multi-sentence` node with the old root as `:snt1` and the
/// sentence as `:snt2`. The sentence's variables are renamed fresh.
pub fn insert_sentence_subgraph(graph: &AmrGraph, sentence: &AmrGraph) -> Result<AmrGraph, AmrError> {
    ensure_valid(graph)?;
    ensure_valid(sentence)?;
    let mut used: HashSet<String> = graph.nodes().iter().map(|n| n.variable.clone()).collect();
    let (s_root, s_nodes, s_edges, s_attrs) = rename_fresh(sentence, &mut used);

    let mut nodes = graph.nodes().to_vec();
    let mut edges = graph.edges().to_vec();
    let mut attributes = graph.attributes().to_vec();
    let root;
    if graph.is_multi_sentence() {
        root = graph.root().to_string();
        let next = graph
            .outgoing(graph.root())
            .filter(|e| role_in_family(&e.role, ":snt"))
            .filter_map(|e| e.role[4..].parse::<u64>().ok())
            .max()
            .unwrap_or(0)
            + 1;
        edges.push(Edge { source: root.clone(), role: format!(":snt{next}"), target: s_root });
    } else {
        root = fresh_variable(MULTI_SENTENCE, &used);
        nodes.insert(0, Node { variable: root.clone(), concept: MULTI_SENTENCE.to_string() });
        edges.insert(0, Edge { source: root.clone(), role: ":snt1".into(), target: graph.root().to_string() });
        edges.push(Edge { source: root.clone(), role: ":snt2".into(), target: s_root });
    }
    nodes.extend(s_nodes);
    edges.extend(s_edges);
    attributes.extend(s_attrs);
    AmrGraph::new(root, nodes, edges, attributes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::{depth, parse, sentence_units};

    const CONCESSION: &str = "(h / have-concession-91 :ARG1 (o / orange :domain (h2 / he) :time (o2 / once)))";

    #[test]
    fn fresh_variables() {
        let used: HashSet<String> = ["h", "h2", "o"].iter().map(|s| s.to_string()).collect();
        assert_eq!(fresh_variable("hate-01", &used), "h3");
        assert_eq!(fresh_variable("you", &used), "y");
        assert_eq!(fresh_variable("Orange", &used), "o2");
        assert_eq!(fresh_variable("3-d", &used), "x");
    }

    #[test]
    fn clone_at_inner_node() {
        let g = parse(CONCESSION).unwrap();
        let c = clone_subgraph(&g, "o").unwrap();
        assert_eq!(c.node_count(), 3);
        assert_eq!(c.edge_count(), 2);
        assert_eq!(c.root_concept(), "orange");
        assert!(!g.contains(c.root()));
        assert_eq!(c.to_string(), "(o3 / orange :domain (h3 / he) :time (o4 / once))");
    }

    #[test]
    fn clone_at_root_is_disjoint_copy() {
        let g = parse(CONCESSION).unwrap();
        let c = clone_subgraph(&g, "h").unwrap();
        assert_eq!(c.canonical_form(), g.canonical_form());
        let originals = g.variables();
        assert!(c.nodes().iter().all(|n| !originals.contains(n.variable.as_str())));
    }

    #[test]
    fn clone_at_leaf() {
        let g = parse(CONCESSION).unwrap();
        let c = clone_subgraph(&g, "o2").unwrap();
        assert_eq!((c.node_count(), c.edge_count()), (1, 0));
    }

    #[test]
    fn clone_copies_reentrant_declarations() {
        let g = parse("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        let c = clone_subgraph(&g, "g").unwrap();
        assert_eq!(c.to_string(), "(g2 / go-02 :ARG0 (b2 / boy))");
    }

    #[test]
    fn clone_of_unknown_variable() {
        let g = parse(CONCESSION).unwrap();
        assert_eq!(clone_subgraph(&g, "zz"), Err(AmrError::UndeclaredVariable("zz".into())));
    }

    #[test]
    fn remove_root_is_an_error() {
        let g = parse(CONCESSION).unwrap();
        assert_eq!(remove_subtree(&g, "h"), Err(AmrError::RootRemoval("h".into())));
        assert_eq!(remove_subtree(&g, "q"), Err(AmrError::UndeclaredVariable("q".into())));
    }

    #[test]
    fn remove_plain_subtree() {
        let g = parse(CONCESSION).unwrap();
        let r = remove_subtree(&g, "o").unwrap();
        assert_eq!(r.to_string(), "(h / have-concession-91)");
    }

    #[test]
    fn remove_promotes_reentrant_node() {
        let g = parse("(w / want-01 :ARG1 (g / go-02 :ARG0 (b / boy)) :ARG0 b)").unwrap();
        let r = remove_subtree(&g, "g").unwrap();
        assert_eq!(r.to_string(), "(w / want-01 :ARG0 (b / boy))");
        assert!(validate(&r).ok);
    }

    #[test]
    fn remove_reentrant_node_keeps_it_when_referenced_elsewhere() {
        let g = parse("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        let r = remove_subtree(&g, "b").unwrap();
        assert_eq!(r.node_count(), 3);
        assert_eq!(r.to_string(), "(w / want-01 :ARG1 (g / go-02 :ARG0 (b / boy)))");
    }

    #[test]
    fn remove_snt_renumbers() {
        let g = parse("(m / multi-sentence :snt1 (a / a) :snt2 (b / b :ARG0 (c / c)) :snt3 (d / d))").unwrap();
        let r = remove_subtree(&g, "b").unwrap();
        assert_eq!(r.to_string(), "(m / multi-sentence :snt1 (a / a) :snt2 (d / d))");
        assert_eq!(sentence_units(&r).iter().map(|u| u.0).collect::<Vec<_>>(), [1, 2]);
    }

    #[test]
    fn insert_into_single_sentence_wraps() {
        let g = parse(CONCESSION).unwrap();
        let s = parse("(h / hate-01 :ARG0 (i / i))").unwrap();
        let out = insert_sentence_subgraph(&g, &s).unwrap();
        assert!(out.is_multi_sentence());
        assert_eq!(sentence_units(&out).len(), 2);
        assert_eq!(
            out.to_string(),
            "(m / multi-sentence :snt1 (h / have-concession-91 :ARG1 (o / orange :domain (h2 / he) :time (o2 / once))) :snt2 (h3 / hate-01 :ARG0 (i / i)))"
        );
        assert!(depth(&out) > depth(&s));
    }

    #[test]
    fn insert_avoids_duplicate_declarations() {
        let g = parse("(m / multi-sentence :snt1 (a / a-01 :ARG0 (i / i)))").unwrap();
        let s = parse("(a / a-01 :ARG0 (i / i) :ARG1 (m / man))").unwrap();
        let out = insert_sentence_subgraph(&g, &s).unwrap();
        assert!(validate(&out).ok);
        assert_eq!(out.node_count(), 6);
        assert_eq!(sentence_units(&out).len(), 2);
        assert_eq!(
            out.to_string(),
            "(m / multi-sentence :snt1 (a / a-01 :ARG0 (i / i)) :snt2 (a2 / a-01 :ARG0 (i2 / i) :ARG1 (m2 / man)))"
        );
    }
}
