use serde::{Deserialize, Serialize};

use crate::amr::{self, node_depths, role_in_family, AMR_UNKNOWN};
use crate::dialogue::{Conversation, Manipulation, ManipulationStep, StepParams};
use crate::rng::SplitMix64;

use super::{apply_step, commit, subtree_variables, ManipulationConfig, ManipulationError, StepResult};

const NAME: Manipulation = Manipulation::Engagement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngagementStrategy {
    /// Drop a sentence containing `amr-unknown`.
    Question,
    /// Cut the deepest node's parent out of the deepest utterance.
    Deepest,
    /// Remove argument subtrees hanging off sentence heads.
    Arguments,
}

impl EngagementStrategy {
    pub const ALL: [EngagementStrategy; 3] =
        [EngagementStrategy::Question, EngagementStrategy::Deepest, EngagementStrategy::Arguments];
}

fn step(utterance: usize, params: StepParams) -> ManipulationStep {
    ManipulationStep { manipulation: NAME, utterance, touched: Vec::new(), params }
}

/// Whether `step` removes at least one node.
fn shrinks(conv: &Conversation, step: &ManipulationStep) -> bool {
    apply_step(conv, step).is_ok_and(|next| next.node_count() < conv.node_count())
}

fn question_candidates(conv: &Conversation) -> Vec<ManipulationStep> {
    let mut out = Vec::new();
    for (u, utterance) in conv.utterances.iter().enumerate() {
        let graph = &utterance.amr;
        let units = amr::sentence_units(graph);
        for (_, head) in &units {
            let asks = subtree_variables(graph, head).into_iter().any(|v| graph.concept(v) == Some(AMR_UNKNOWN));
            if !asks {
                continue;
            }
            let candidate = if units.len() == 1 {
                step(u, StepParams::DropUtterance)
            } else {
                step(u, StepParams::RemoveSubtree { variable: head.clone() })
            };
            if shrinks(conv, &candidate) {
                out.push(candidate);
            }
        }
    }
    out
}

/// One removal per utterance of maximal depth (at least 2): the parent of
/// its first deepest node, following the longest path.
fn deepest_candidates(conv: &Conversation) -> Vec<ManipulationStep> {
    let depths: Vec<usize> = conv.utterances.iter().map(|u| amr::depth(&u.amr)).collect();
    let Some(&max) = depths.iter().max() else { return Vec::new() };
    if max < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (u, utterance) in conv.utterances.iter().enumerate().filter(|(u, _)| depths[*u] == max) {
        let graph = &utterance.amr;
        let node_depth = node_depths(graph);
        let Some(deepest) = graph.nodes().iter().map(|n| n.variable.as_str()).find(|v| node_depth.get(v) == Some(&max))
        else {
            continue;
        };
        let Some(parent) =
            graph.incoming(deepest).map(|e| e.source.as_str()).find(|s| node_depth.get(s) == Some(&(max - 1)))
        else {
            continue;
        };
        let candidate = step(u, StepParams::RemoveSubtree { variable: parent.to_string() });
        if shrinks(conv, &candidate) {
            out.push(candidate);
        }
    }
    out
}

/// `:ARGn`/`:opn` children of sentence heads, reached through their
/// declaring edge, that are not themselves sentence heads.
fn argument_candidates(conv: &Conversation) -> Vec<ManipulationStep> {
    let mut out = Vec::new();
    for (u, utterance) in conv.utterances.iter().enumerate() {
        let graph = &utterance.amr;
        let units = amr::sentence_units(graph);
        for (_, head) in &units {
            for e in graph.outgoing(head) {
                if !(role_in_family(&e.role, ":ARG") || role_in_family(&e.role, ":op")) {
                    continue;
                }
                if graph.primary_edge(&e.target) != Some(e) || units.iter().any(|(_, h)| *h == e.target) {
                    continue;
                }
                let candidate = step(u, StepParams::RemoveSubtree { variable: e.target.clone() });
                if shrinks(conv, &candidate) {
                    out.push(candidate);
                }
            }
        }
    }
    out
}

/// Makes the conversation less engaging by deleting content. Without an
/// explicit strategy one is drawn, weighted by `engagement_weights`, among
/// those that apply.
pub fn decrease_engagement(
    conv: &Conversation,
    config: &ManipulationConfig,
    strategy: Option<EngagementStrategy>,
    rng: &mut SplitMix64,
) -> StepResult {
    let candidates = |s: EngagementStrategy| match s {
        EngagementStrategy::Question => question_candidates(conv),
        EngagementStrategy::Deepest => deepest_candidates(conv),
        EngagementStrategy::Arguments => argument_candidates(conv),
    };
    let (strategy, found) = match strategy {
        Some(s) => (s, candidates(s)),
        None => {
            let w = config.engagement_weights;
            let mut found: Vec<Vec<ManipulationStep>> =
                EngagementStrategy::ALL.iter().map(|s| candidates(*s)).collect();
            let weights: Vec<f64> = [w.question, w.deepest, w.arguments]
                .iter()
                .zip(&found)
                .map(|(w, f)| if f.is_empty() { 0.0 } else { *w })
                .collect();
            let Some(i) = rng.weighted_index(&weights) else {
                return Err(ManipulationError::not_applicable(NAME, "no strategy applies"));
            };
            (EngagementStrategy::ALL[i], std::mem::take(&mut found[i]))
        }
    };
    if found.is_empty() {
        return Err(ManipulationError::not_applicable(NAME, format!("{strategy:?} strategy does not apply")));
    }
    match strategy {
        EngagementStrategy::Question | EngagementStrategy::Deepest => {
            let chosen = found[rng.index(found.len())].clone();
            let (next, step) = commit(conv, chosen)?;
            Ok((next, vec![step]))
        }
        EngagementStrategy::Arguments => {
            let Some((lo, hi)) = config.argument_removals.clamp_to(found.len()) else {
                return Err(ManipulationError::not_applicable(NAME, "no removable argument"));
            };
            let k = rng.range_inclusive(lo, hi);
            let mut picked = rng.sample_indices(found.len(), k);
            picked.sort_unstable();
            let mut conv = conv.clone();
            let mut steps = Vec::with_capacity(k);
            for i in picked {
                let candidate = found[i].clone();
                // An earlier removal may already have taken this subtree.
                let StepParams::RemoveSubtree { variable } = &candidate.params else { continue };
                if !conv.utterances[candidate.utterance].amr.contains(variable) || !shrinks(&conv, &candidate) {
                    continue;
                }
                let (next, step) = commit(&conv, candidate)?;
                conv = next;
                steps.push(step);
            }
            Ok((conv, steps))
        }
    }
}
