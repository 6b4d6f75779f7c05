use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{AmrGraph, AMR_UNKNOWN};

/// Concepts treated as pronouns. AMR writes every pronoun in its subjective
/// form, so `me`, `my` and `mine` all surface as `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PronounInventory(BTreeSet<String>);

impl Default for PronounInventory {
    fn default() -> Self {
        PronounInventory::new(["i", "you", "he", "she", "it", "we", "they"])
    }
}

impl PronounInventory {
    pub fn new<I, S>(pronouns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PronounInventory(pronouns.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.0.contains(concept)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Selects nodes for [`find_nodes`].
#[derive(Debug, Clone)]
pub enum NodePredicate<'a> {
    ConceptIn(&'a BTreeSet<String>),
    ConceptEquals(&'a str),
    /// Some incoming edge has a role of the family `prefix` followed by an
    /// index: `:ARG` matches `:ARG0` and `:ARG12`, not `:ARG0-of`.
    IncomingRole(&'a str),
    Pronoun(&'a PronounInventory),
}

impl NodePredicate<'_> {
    /// The `amr-unknown` question marker.
    pub fn question() -> NodePredicate<'static> {
        NodePredicate::ConceptEquals(AMR_UNKNOWN)
    }
}

/// Whether `role` is `family` followed by one or more digits.
pub(crate) fn role_in_family(role: &str, family: &str) -> bool {
    role.strip_prefix(family).is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}

/// Whether `concept` is a PropBank frameset such as `watch-01`.
pub fn is_predicate(concept: &str) -> bool {
    let b = concept.as_bytes();
    b.len() >= 4 && b[b.len() - 3] == b'-' && b[b.len() - 2..].iter().all(u8::is_ascii_digit)
}

/// Matching variables in declaration order.
pub fn find_nodes(graph: &AmrGraph, predicate: &NodePredicate<'_>) -> Vec<String> {
    graph
        .nodes()
        .iter()
        .filter(|n| match predicate {
            NodePredicate::ConceptIn(set) => set.contains(&n.concept),
            NodePredicate::ConceptEquals(c) => n.concept == *c,
            NodePredicate::IncomingRole(prefix) => graph.incoming(&n.variable).any(|e| role_in_family(&e.role, prefix)),
            NodePredicate::Pronoun(inventory) => inventory.contains(&n.concept),
        })
        .map(|n| n.variable.clone())
        .collect()
}

/// Longest root-to-node path, in edges.
pub fn depth(graph: &AmrGraph) -> usize {
    node_depths(graph).into_values().max().unwrap_or(0)
}

/// Depth of every node reachable from the root, taking the longest path on
/// reentrancy. Assumes an acyclic graph.
pub(crate) fn node_depths(graph: &AmrGraph) -> HashMap<&str, usize> {
    // Relax edges in topological order.
    let order = topological_order(graph);
    let mut depths: HashMap<&str, usize> = HashMap::new();
    depths.insert(graph.root(), 0);
    for v in order {
        let Some(&d) = depths.get(v) else { continue };
        for e in graph.outgoing(v) {
            let slot = depths.entry(e.target.as_str()).or_insert(0);
            *slot = (*slot).max(d + 1);
        }
    }
    depths
}

fn topological_order(graph: &AmrGraph) -> Vec<&str> {
    let mut indegree: HashMap<&str, usize> = graph.nodes().iter().map(|n| (n.variable.as_str(), 0)).collect();
    for e in graph.edges() {
        *indegree.entry(e.target.as_str()).or_default() += 1;
    }
    let mut ready: Vec<&str> = graph.nodes().iter().map(|n| n.variable.as_str()).filter(|v| indegree[v] == 0).collect();
    ready.reverse();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(v) = ready.pop() {
        order.push(v);
        for e in graph.outgoing(v) {
            let d = indegree.get_mut(e.target.as_str()).expect("declared target");
            *d -= 1;
            if *d == 0 {
                ready.push(e.target.as_str());
            }
        }
    }
    order
}

/// Sentence units of an utterance graph as `(index, variable)` pairs: the
/// `:sntK` children of a `multi-sentence` root ordered by `K`, or the root
/// itself as unit 1.
pub fn sentence_units(graph: &AmrGraph) -> Vec<(usize, String)> {
    if !graph.is_multi_sentence() {
        return vec![(1, graph.root().to_string())];
    }
    let mut units: Vec<(usize, String)> = graph
        .outgoing(graph.root())
        .filter(|e| role_in_family(&e.role, ":snt"))
        .filter_map(|e| Some((e.role[4..].parse().ok()?, e.target.clone())))
        .collect();
    units.sort();
    units
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::parse;

    #[test]
    fn depth_examples() {
        assert_eq!(depth(&AmrGraph::single("i", "i")), 0);
        let g = parse("(h / have-concession-91 :ARG1 (o / orange :domain (h2 / he) :time (o2 / once)))").unwrap();
        assert_eq!(depth(&g), 2);
    }

    #[test]
    fn depth_takes_longest_path_on_reentrancy() {
        let g = parse("(a / a :ARG0 (d / d) :ARG1 (b / b :ARG0 (c / c :ARG0 d)))").unwrap();
        assert_eq!(depth(&g), 3);
        assert_eq!(node_depths(&g)["d"], 3);
    }

    #[test]
    fn predicates() {
        for p in ["watch-01", "have-rel-role-91", "include-91", "a-01"] {
            assert!(is_predicate(p), "{p}");
        }
        for p in ["orange", "-01", "x-1", "amr-unknown", "multi-sentence", "a-0b"] {
            assert!(!is_predicate(p), "{p}");
        }
    }

    #[test]
    fn role_families() {
        assert!(role_in_family(":ARG0", ":ARG"));
        assert!(role_in_family(":snt12", ":snt"));
        assert!(!role_in_family(":ARG0-of", ":ARG"));
        assert!(!role_in_family(":ARG", ":ARG"));
        assert!(!role_in_family(":mod", ":ARG"));
    }

    #[test]
    fn find_on_non_matching_single_node() {
        let g = AmrGraph::single("o", "orange");
        let inventory = PronounInventory::default();
        assert!(find_nodes(&g, &NodePredicate::Pronoun(&inventory)).is_empty());
        assert!(find_nodes(&g, &NodePredicate::question()).is_empty());
        assert!(find_nodes(&g, &NodePredicate::IncomingRole(":ARG")).is_empty());
        let set = BTreeSet::from(["apple".to_string()]);
        assert!(find_nodes(&g, &NodePredicate::ConceptIn(&set)).is_empty());
    }

    #[test]
    fn incoming_role_in_traversal_order() {
        let g = parse("(a / and :op1 (b / b) :op2 (c / c :ARG0 (d / d)) :mod (e / e))").unwrap();
        assert_eq!(find_nodes(&g, &NodePredicate::IncomingRole(":op")), ["b", "c"]);
        assert_eq!(find_nodes(&g, &NodePredicate::IncomingRole(":ARG")), ["d"]);
    }

    #[test]
    fn units_of_single_sentence() {
        let g = AmrGraph::single("i", "i");
        assert_eq!(sentence_units(&g), [(1, "i".to_string())]);
    }

    #[test]
    fn units_are_sorted_by_index() {
        let g = parse("(m / multi-sentence :snt2 (b / b) :snt1 (a / a) :mod (c / c))").unwrap();
        assert_eq!(sentence_units(&g), [(1, "a".to_string()), (2, "b".to_string())]);
    }
}
