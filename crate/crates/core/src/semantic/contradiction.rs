use crate::amr::{self, is_predicate, AmrGraph, POLARITY};
use crate::dialogue::{ContradictionEdit, Conversation, Manipulation, ManipulationStep, SentenceCopy, StepParams};
use crate::knowledge::AntonymLexicon;
use crate::rng::SplitMix64;

use super::{commit, ManipulationConfig, ManipulationError, StepResult};

const NAME: Manipulation = Manipulation::Contradiction;

fn polarity_target(graph: &AmrGraph, head: &str) -> bool {
    let concept = graph.concept(head).unwrap_or_default();
    // A `:polarity (a / amr-unknown)` edge marks a yes/no question; negating
    // it as well would not read as a contradiction.
    is_predicate(concept) && !graph.outgoing(head).any(|e| e.role == POLARITY)
}

fn eligible(graph: &AmrGraph, head: &str, lexicon: &AntonymLexicon) -> bool {
    graph.concept(head).is_some_and(|c| lexicon.covers(c)) || polarity_target(graph, head)
}

/// How the sentence headed by `head` gets contradicted: an antonym from the
/// lexicon when there is one (drawn uniformly when there are several),
/// otherwise a `:polarity -` toggle on predicate heads. A head that is
/// already negated loses its negation.
pub fn contradiction_edit(
    graph: &AmrGraph,
    head: &str,
    lexicon: &AntonymLexicon,
    rng: &mut SplitMix64,
) -> Option<ContradictionEdit> {
    let concept = graph.concept(head)?;
    if graph.is_negated(head) && polarity_target(graph, head) {
        return Some(ContradictionEdit::Polarity);
    }
    let antonyms: Vec<String> = lexicon.antonyms_of(concept).into_iter().collect();
    if let Some(replacement) = rng.choose(&antonyms) {
        return Some(ContradictionEdit::Antonym { replacement: replacement.clone() });
    }
    polarity_target(graph, head).then_some(ContradictionEdit::Polarity)
}

/// Copies every sentence of utterance `source` onto the end of utterance
/// `target`, contradicting the sentences whose `:sntK` indices are listed in
/// `units` (index 1 for a single-sentence utterance).
pub fn contradict_units(
    conv: &Conversation,
    lexicon: &AntonymLexicon,
    source: usize,
    target: usize,
    units: &[usize],
    rng: &mut SplitMix64,
) -> StepResult {
    let n = conv.utterances.len();
    if source >= target || target >= n {
        return Err(ManipulationError::BadStep(format!("need source < target < {n}, got {source}, {target}")));
    }
    if conv.utterances[source].speaker != conv.utterances[target].speaker {
        return Err(ManipulationError::BadStep("source and target speakers differ".into()));
    }
    if units.is_empty() {
        return Err(ManipulationError::BadStep("no sentence selected".into()));
    }
    let graph = &conv.utterances[source].amr;
    let all_units = amr::sentence_units(graph);
    let mut copies = Vec::with_capacity(all_units.len());
    for &unit in units {
        if !all_units.iter().any(|(k, _)| *k == unit) {
            return Err(ManipulationError::BadStep(format!("utterance {source} has no sentence {unit}")));
        }
    }
    for (k, head) in &all_units {
        let edit = if units.contains(k) {
            let edit = contradiction_edit(graph, head, lexicon, rng)
                .ok_or_else(|| ManipulationError::BadStep(format!("sentence {k} cannot be contradicted")))?;
            Some(edit)
        } else {
            None
        };
        copies.push(SentenceCopy { unit: *k, edit });
    }
    let step = ManipulationStep {
        manipulation: NAME,
        utterance: target,
        touched: Vec::new(),
        params: StepParams::AppendSentences { source_utterance: source, copies },
    };
    let (next, step) = commit(conv, step)?;
    Ok((next, vec![step]))
}

/// Makes a speaker contradict something they said earlier.
///
/// Picks an utterance that has a later utterance by the same speaker and at
/// least one contradictable sentence, then appends its sentences to that
/// later utterance with 1 to `contradiction_units` of them contradicted.
pub fn contradict(
    conv: &Conversation,
    lexicon: &AntonymLexicon,
    config: &ManipulationConfig,
    rng: &mut SplitMix64,
) -> StepResult {
    let n = conv.utterances.len();
    let later_same_speaker = |i: usize| -> Vec<usize> {
        (i + 1..n).filter(|&j| conv.utterances[j].speaker == conv.utterances[i].speaker).collect()
    };
    let eligible_units = |i: usize| -> Vec<usize> {
        let graph = &conv.utterances[i].amr;
        amr::sentence_units(graph)
            .into_iter()
            .filter(|(_, head)| eligible(graph, head, lexicon))
            .map(|(k, _)| k)
            .collect()
    };
    let sources: Vec<usize> =
        (0..n).filter(|&i| !later_same_speaker(i).is_empty() && !eligible_units(i).is_empty()).collect();
    let Some(&source) = rng.choose(&sources) else {
        return Err(ManipulationError::not_applicable(
            NAME,
            "no contradictable sentence has a later utterance by the same speaker",
        ));
    };
    let targets = later_same_speaker(source);
    let target = targets[rng.index(targets.len())];
    let candidates = eligible_units(source);
    let Some((lo, hi)) = config.contradiction_units.clamp_to(candidates.len()) else {
        return Err(ManipulationError::not_applicable(NAME, "too few contradictable sentences"));
    };
    let k = rng.range_inclusive(lo, hi);
    let mut units: Vec<usize> = rng.sample_indices(candidates.len(), k).into_iter().map(|i| candidates[i]).collect();
    units.sort_unstable();
    contradict_units(conv, lexicon, source, target, &units, rng)
}
