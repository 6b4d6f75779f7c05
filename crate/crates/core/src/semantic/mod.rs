//! Semantic-level incoherence injected into utterance graphs.
//!
//! Four manipulations are available, each producing one or more
//! [`ManipulationStep`]s:
//!
//! * [`contradict`]: copies sentences of an earlier utterance into a later
//!   utterance of the same speaker, contradicted by antonym substitution or
//!   by toggling `:polarity -`.
//! * [`coref_inconsistency`]: rewrites pronoun arguments into another pronoun
//!   or a noun mentioned elsewhere in the conversation.
//! * [`irrelevancy`]: swaps concepts for same-category concepts taken from
//!   other utterances.
//! * [`decrease_engagement`]: removes a question sentence, the most detailed
//!   part of the deepest utterance, or argument subtrees.
//!
//! Every step carries concrete parameters, and [`apply_step`] applies one
//! without randomness, so a [`ManipulationRecord`] replays exactly
//! ([`replay`]). [`apply_pipeline`] composes the manipulations.

mod config;
mod contradiction;
mod coreference;
mod engagement;
mod irrelevancy;
mod pipeline;

use std::collections::HashSet;

pub use config::{CountRange, EngagementWeights, ManipulationConfig};
pub use contradiction::{contradict, contradict_units, contradiction_edit};
pub use coreference::coref_inconsistency;
pub use engagement::{decrease_engagement, EngagementStrategy};
pub use irrelevancy::{irrelevancy, DonorPool};
pub use pipeline::{apply_pipeline, draw_op_count, Manipulator};

use crate::amr::{self, AmrError, AmrGraph};
use crate::dialogue::{
    ContradictionEdit, Conversation, Label, Manipulation, ManipulationRecord, ManipulationStep, StepParams,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ManipulationError {
    /// Nothing in the conversation fits; callers try another manipulation.
    #[error("{manipulation} not applicable: {reason}")]
    NotApplicable { manipulation: Manipulation, reason: String },
    #[error(transparent)]
    Amr(#[from] AmrError),
    #[error("step cannot be applied: {0}")]
    BadStep(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl ManipulationError {
    pub(crate) fn not_applicable(manipulation: Manipulation, reason: impl Into<String>) -> Self {
        ManipulationError::NotApplicable { manipulation, reason: reason.into() }
    }
}

pub type StepResult = Result<(Conversation, Vec<ManipulationStep>), ManipulationError>;

fn utterance_graph(conv: &Conversation, index: usize) -> Result<&AmrGraph, ManipulationError> {
    conv.utterances
        .get(index)
        .map(|u| &u.amr)
        .ok_or_else(|| ManipulationError::BadStep(format!("no utterance {index}")))
}

/// Variables of `after` absent from `before`, in `after`'s order.
fn added_variables(before: &AmrGraph, after: &AmrGraph) -> Vec<String> {
    let old = before.variables();
    after.nodes().iter().filter(|n| !old.contains(n.variable.as_str())).map(|n| n.variable.clone()).collect()
}

/// Variables of `before` absent from `after`, in `before`'s order.
fn removed_variables(before: &AmrGraph, after: &AmrGraph) -> Vec<String> {
    added_variables(after, before)
}

/// Applies one step. Deterministic: the same step on the same conversation
/// always gives the same result. Splices need the donor corpus and are
/// handled by [`crate::baseline::apply_splice`].
pub fn apply_step(conv: &Conversation, step: &ManipulationStep) -> Result<Conversation, ManipulationError> {
    let mut out = conv.clone();
    let u = step.utterance;
    match &step.params {
        StepParams::ReplaceConcept { variable, from, to, .. } => {
            let graph = utterance_graph(conv, u)?;
            match graph.concept(variable) {
                Some(current) if current == from => {}
                other => {
                    return Err(ManipulationError::BadStep(format!(
                        "utterance {u} variable `{variable}` is {other:?}, expected `{from}`"
                    )))
                }
            }
            out.utterances[u].amr = graph.with_concept(variable, to)?;
        }
        StepParams::RemoveSubtree { variable } => {
            out.utterances[u].amr = amr::remove_subtree(utterance_graph(conv, u)?, variable)?;
        }
        StepParams::DropUtterance => {
            utterance_graph(conv, u)?;
            if conv.utterances.len() < 2 {
                return Err(ManipulationError::BadStep("cannot drop the only utterance".into()));
            }
            out.utterances.remove(u);
        }
        StepParams::AppendSentences { source_utterance, copies } => {
            if *source_utterance >= u {
                return Err(ManipulationError::BadStep("source must precede target".into()));
            }
            let source = utterance_graph(conv, *source_utterance)?;
            let units = amr::sentence_units(source);
            let mut target = utterance_graph(conv, u)?.clone();
            for copy in copies {
                let (_, head) = units
                    .iter()
                    .find(|(k, _)| *k == copy.unit)
                    .ok_or_else(|| ManipulationError::BadStep(format!("no sentence {} in source", copy.unit)))?;
                let mut sentence = amr::clone_subgraph(source, head)?;
                let root = sentence.root().to_string();
                sentence = match &copy.edit {
                    None => sentence,
                    Some(ContradictionEdit::Antonym { replacement }) => sentence.with_concept(&root, replacement)?,
                    Some(ContradictionEdit::Polarity) => sentence.with_polarity_toggled(&root)?,
                };
                target = amr::insert_sentence_subgraph(&target, &sentence)?;
            }
            out.utterances[u].amr = target;
        }
        StepParams::Permute { order } => {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != (0..conv.utterances.len()).collect::<Vec<_>>() {
                return Err(ManipulationError::BadStep("order is not a permutation".into()));
            }
            out.utterances = order.iter().map(|&i| conv.utterances[i].clone()).collect();
        }
        StepParams::Splice { .. } => {
            return Err(ManipulationError::BadStep("splices need the donor corpus".into()));
        }
    }
    Ok(out)
}

/// Re-applies a record's steps to the original conversation.
pub fn replay(original: &Conversation, record: &ManipulationRecord) -> Result<Conversation, ManipulationError> {
    let mut conv = original.clone();
    conv.record = None;
    for step in &record.steps {
        conv = apply_step(&conv, step)?;
    }
    Ok(finish(conv, record.clone()))
}

/// Attaches the record and marks the conversation incoherent when anything
/// changed.
pub(crate) fn finish(mut conv: Conversation, record: ManipulationRecord) -> Conversation {
    if !record.steps.is_empty() {
        conv.label = Some(Label::Incoherent);
    }
    conv.record = Some(record);
    conv
}

/// Applies `step`, returning the new conversation and the step with its
/// `touched` list filled in from the graph difference.
pub(crate) fn commit(
    conv: &Conversation,
    mut step: ManipulationStep,
) -> Result<(Conversation, ManipulationStep), ManipulationError> {
    let next = apply_step(conv, &step)?;
    if step.touched.is_empty() {
        step.touched = match &step.params {
            StepParams::ReplaceConcept { variable, .. } => vec![variable.clone()],
            StepParams::RemoveSubtree { .. } => {
                removed_variables(&conv.utterances[step.utterance].amr, &next.utterances[step.utterance].amr)
            }
            StepParams::DropUtterance => {
                conv.utterances[step.utterance].amr.nodes().iter().map(|n| n.variable.clone()).collect()
            }
            StepParams::AppendSentences { .. } => {
                added_variables(&conv.utterances[step.utterance].amr, &next.utterances[step.utterance].amr)
            }
            _ => Vec::new(),
        };
    }
    Ok((next, step))
}

/// Every variable reachable from `start`.
pub(crate) fn subtree_variables<'a>(graph: &'a AmrGraph, start: &'a str) -> HashSet<&'a str> {
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for e in graph.outgoing(v) {
            if seen.insert(e.target.as_str()) {
                stack.push(e.target.as_str());
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::SentenceCopy;
    use crate::fixtures;

    fn step(utterance: usize, params: StepParams) -> ManipulationStep {
        ManipulationStep { manipulation: Manipulation::Engagement, utterance, touched: vec![], params }
    }

    #[test]
    fn replace_concept_checks_current_value() {
        let c = fixtures::sesame_street();
        let bad = step(
            0,
            StepParams::ReplaceConcept {
                variable: "w".into(),
                from: "eat-01".into(),
                to: "x".into(),
                donor_utterance: None,
            },
        );
        assert!(matches!(apply_step(&c, &bad), Err(ManipulationError::BadStep(_))));
    }

    #[test]
    fn out_of_range_steps_are_rejected() {
        let c = fixtures::sesame_street();
        assert!(apply_step(&c, &step(9, StepParams::DropUtterance)).is_err());
        assert!(apply_step(&c, &step(0, StepParams::Permute { order: vec![0, 0, 1, 2] })).is_err());
        let backwards =
            StepParams::AppendSentences { source_utterance: 3, copies: vec![SentenceCopy { unit: 1, edit: None }] };
        assert!(apply_step(&c, &step(1, backwards)).is_err());
    }

    #[test]
    fn commit_fills_touched_variables() {
        let c = fixtures::sesame_street();
        let (next, s) = commit(&c, step(2, StepParams::RemoveSubtree { variable: "h2".into() })).unwrap();
        assert_eq!(s.touched, ["h2", "g", "h3", "c2", "a2"]);
        assert_eq!(next.node_count(), c.node_count() - 5);
    }
}
