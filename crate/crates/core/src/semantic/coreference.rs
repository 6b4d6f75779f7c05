use std::collections::BTreeSet;

use crate::amr::{find_nodes, is_predicate, role_in_family, NodePredicate, AMR_UNKNOWN, MULTI_SENTENCE};
use crate::dialogue::{Conversation, Manipulation, ManipulationStep, StepParams};
use crate::rng::SplitMix64;

use super::{commit, ManipulationConfig, ManipulationError, StepResult};

const NAME: Manipulation = Manipulation::Coreference;

fn is_argument(role: &str) -> bool {
    role_in_family(role, ":ARG") || role_in_family(role, ":op")
}

/// Pronoun nodes that fill an `:ARGn` slot, as `(utterance, variable)`.
fn pronoun_arguments(conv: &Conversation, config: &ManipulationConfig) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    for (u, utterance) in conv.utterances.iter().enumerate() {
        let graph = &utterance.amr;
        for v in find_nodes(graph, &NodePredicate::Pronoun(&config.pronouns)) {
            if graph.incoming(&v).any(|e| role_in_family(&e.role, ":ARG")) {
                out.push((u, v));
            }
        }
    }
    out
}

/// Nouns mentioned as arguments anywhere in the conversation.
fn harvested_nouns(conv: &Conversation, config: &ManipulationConfig) -> BTreeSet<String> {
    let mut nouns = BTreeSet::new();
    for utterance in &conv.utterances {
        let graph = &utterance.amr;
        for e in graph.edges().iter().filter(|e| is_argument(&e.role)) {
            let concept = graph.concept(&e.target).unwrap_or_default();
            if !is_predicate(concept)
                && !config.pronouns.contains(concept)
                && concept != AMR_UNKNOWN
                && concept != MULTI_SENTENCE
            {
                nouns.insert(concept.to_string());
            }
        }
    }
    nouns
}

/// Rewrites 1 to `coreference_items` pronoun arguments into a different
/// pronoun or into a noun the conversation mentions elsewhere. Only concepts
/// change; the graph structure is untouched.
pub fn coref_inconsistency(conv: &Conversation, config: &ManipulationConfig, rng: &mut SplitMix64) -> StepResult {
    let candidates = pronoun_arguments(conv, config);
    let Some((lo, hi)) = config.coreference_items.clamp_to(candidates.len()) else {
        return Err(ManipulationError::not_applicable(NAME, "no pronoun fills an argument slot"));
    };
    let nouns = harvested_nouns(conv, config);
    let k = rng.range_inclusive(lo, hi);
    let mut picked = rng.sample_indices(candidates.len(), k);
    picked.sort_unstable();

    let mut conv = conv.clone();
    let mut steps = Vec::with_capacity(k);
    for i in picked {
        let (u, variable) = &candidates[i];
        let current = conv.utterances[*u].amr.concept(variable).unwrap_or_default().to_string();
        let pronouns: Vec<&str> = config.pronouns.iter().filter(|p| *p != current).collect();
        let others: Vec<&str> = nouns.iter().map(String::as_str).filter(|n| *n != current).collect();
        let pool = if !others.is_empty() && (pronouns.is_empty() || rng.bernoulli(0.5)) { &others } else { &pronouns };
        let Some(&to) = rng.choose(pool) else { continue };
        let step = ManipulationStep {
            manipulation: NAME,
            utterance: *u,
            touched: Vec::new(),
            params: StepParams::ReplaceConcept {
                variable: variable.clone(),
                from: current,
                to: to.to_string(),
                donor_utterance: None,
            },
        };
        let (next, step) = commit(&conv, step)?;
        conv = next;
        steps.push(step);
    }
    if steps.is_empty() {
        return Err(ManipulationError::not_applicable(NAME, "no replacement differs from the pronoun"));
    }
    Ok((conv, steps))
}
