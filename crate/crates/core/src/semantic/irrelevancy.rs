use std::collections::BTreeSet;

use crate::amr::{is_predicate, role_in_family, AmrGraph, AMR_UNKNOWN, MULTI_SENTENCE};
use crate::dialogue::{Conversation, Manipulation, ManipulationStep, StepParams};
use crate::rng::SplitMix64;

use super::{commit, ManipulationConfig, ManipulationError, StepResult};

const NAME: Manipulation = Manipulation::Irrelevancy;

/// Replaceable items of a graph: predicate nodes and the targets of
/// `:ARGn`/`:opn` edges, as `(variable, concept)` in declaration order.
fn items(graph: &AmrGraph) -> Vec<(&str, &str)> {
    graph
        .nodes()
        .iter()
        .filter(|n| n.concept != MULTI_SENTENCE && n.concept != AMR_UNKNOWN)
        .filter(|n| {
            is_predicate(&n.concept)
                || graph
                    .incoming(&n.variable)
                    .any(|e| role_in_family(&e.role, ":ARG") || role_in_family(&e.role, ":op"))
        })
        .map(|n| (n.variable.as_str(), n.concept.as_str()))
        .collect()
}

/// Extra donor concepts, used when `widen_donors` is set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DonorPool {
    predicates: BTreeSet<String>,
    others: BTreeSet<String>,
}

impl DonorPool {
    pub fn new() -> Self {
        DonorPool::default()
    }

    pub fn from_conversations<'a>(conversations: impl IntoIterator<Item = &'a Conversation>) -> Self {
        let mut pool = DonorPool::new();
        for conv in conversations {
            for u in &conv.utterances {
                pool.add_graph(&u.amr);
            }
        }
        pool
    }

    pub fn add_graph(&mut self, graph: &AmrGraph) {
        for (_, concept) in items(graph) {
            self.add(concept);
        }
    }

    pub fn add(&mut self, concept: &str) {
        if is_predicate(concept) {
            self.predicates.insert(concept.to_string());
        } else {
            self.others.insert(concept.to_string());
        }
    }

    pub fn len(&self) -> usize {
        self.predicates.len() + self.others.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn same_category(&self, concept: &str) -> &BTreeSet<String> {
        if is_predicate(concept) {
            &self.predicates
        } else {
            &self.others
        }
    }
}

struct Target {
    utterance: usize,
    variable: String,
    concept: String,
    /// Distinct `(concept, donor utterance)` pairs of the same category.
    donors: Vec<(String, Option<usize>)>,
}

fn targets(conv: &Conversation, pool: Option<&DonorPool>) -> Vec<Target> {
    let per_utterance: Vec<Vec<(&str, &str)>> = conv.utterances.iter().map(|u| items(&u.amr)).collect();
    let mut out = Vec::new();
    for (u, list) in per_utterance.iter().enumerate() {
        for &(variable, concept) in list {
            let category = is_predicate(concept);
            let mut donors: Vec<(String, Option<usize>)> = Vec::new();
            for (d, other) in per_utterance.iter().enumerate().filter(|(d, _)| *d != u) {
                let found: BTreeSet<&str> =
                    other.iter().map(|(_, c)| *c).filter(|c| *c != concept && is_predicate(c) == category).collect();
                donors.extend(found.into_iter().map(|c| (c.to_string(), Some(d))));
            }
            if let Some(pool) = pool {
                for c in pool.same_category(concept) {
                    if c != concept && !donors.iter().any(|(known, _)| known == c) {
                        donors.push((c.clone(), None));
                    }
                }
            }
            if !donors.is_empty() {
                out.push(Target { utterance: u, variable: variable.to_string(), concept: concept.to_string(), donors });
            }
        }
    }
    out
}

/// Swaps 1 to `irrelevancy_items` concepts for concepts of the same kind
/// (predicate or not) taken from other utterances of the conversation, or
/// from `pool` as well when `widen_donors` is set.
pub fn irrelevancy(
    conv: &Conversation,
    config: &ManipulationConfig,
    pool: Option<&DonorPool>,
    rng: &mut SplitMix64,
) -> StepResult {
    if conv.utterances.len() < 2 {
        return Err(ManipulationError::not_applicable(NAME, "needs at least two utterances"));
    }
    let pool = pool.filter(|_| config.widen_donors);
    let candidates = targets(conv, pool);
    let Some((lo, hi)) = config.irrelevancy_items.clamp_to(candidates.len()) else {
        return Err(ManipulationError::not_applicable(NAME, "no item has a same-category donor"));
    };
    let k = rng.range_inclusive(lo, hi);
    let mut picked = rng.sample_indices(candidates.len(), k);
    picked.sort_unstable();

    let mut conv = conv.clone();
    let mut steps = Vec::with_capacity(k);
    for i in picked {
        let target = &candidates[i];
        let (to, donor) = &target.donors[rng.index(target.donors.len())];
        let step = ManipulationStep {
            manipulation: NAME,
            utterance: target.utterance,
            touched: Vec::new(),
            params: StepParams::ReplaceConcept {
                variable: target.variable.clone(),
                from: target.concept.clone(),
                to: to.clone(),
                donor_utterance: *donor,
            },
        };
        let (next, step) = commit(&conv, step)?;
        conv = next;
        steps.push(step);
    }
    Ok((conv, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::{parse, validate};
    use crate::dialogue::Utterance;
    use crate::fixtures;

    #[test]
    fn category_and_counts_are_preserved() {
        let conv = fixtures::sesame_street();
        let config = ManipulationConfig::default();
        for seed in 0..500 {
            let mut rng = SplitMix64::new(seed);
            let (out, steps) = irrelevancy(&conv, &config, None, &mut rng).unwrap();
            assert!((1..=3).contains(&steps.len()));
            assert_eq!(out.node_count(), conv.node_count());
            assert_eq!(out.edge_count(), conv.edge_count());
            for step in &steps {
                let StepParams::ReplaceConcept { from, to, donor_utterance, .. } = &step.params else { panic!() };
                assert_ne!(from, to);
                assert_eq!(is_predicate(from), is_predicate(to));
                let d = donor_utterance.unwrap();
                assert_ne!(d, step.utterance);
                assert!(conv.utterances[d].amr.nodes().iter().any(|n| &n.concept == to));
            }
            assert!(out.utterances.iter().all(|u| validate(&u.amr).ok));
        }
    }

    #[test]
    fn single_utterance_is_not_applicable() {
        let conv = Conversation::new("c", vec![Utterance::new("A", parse("(w / watch-01 :ARG0 (y / you))").unwrap())]);
        let mut rng = SplitMix64::new(0);
        assert!(irrelevancy(&conv, &ManipulationConfig::default(), None, &mut rng).is_err());
    }

    #[test]
    fn widened_pool_supplies_outside_donors() {
        let conv = Conversation::new(
            "c",
            vec![
                Utterance::new("A", parse("(w / watch-01 :ARG0 (y / you))").unwrap()),
                Utterance::new("B", parse("(w / watch-01 :ARG0 (y / you))").unwrap()),
            ],
        );
        let mut rng = SplitMix64::new(0);
        assert!(irrelevancy(&conv, &ManipulationConfig::default(), None, &mut rng).is_err());
        let mut pool = DonorPool::new();
        pool.add("listen-01");
        let config = ManipulationConfig { widen_donors: true, irrelevancy_items: [1, 1].into(), ..Default::default() };
        let (out, steps) = irrelevancy(&conv, &config, Some(&pool), &mut rng).unwrap();
        let StepParams::ReplaceConcept { to, donor_utterance, .. } = &steps[0].params else { panic!() };
        assert_eq!((to.as_str(), *donor_utterance), ("listen-01", None));
        assert!(out.utterances.iter().any(|u| u.amr.root_concept() == "listen-01"));
        // without the flag the pool is ignored
        let config = ManipulationConfig { widen_donors: false, ..config };
        assert!(irrelevancy(&conv, &config, Some(&pool), &mut rng).is_err());
    }
}
