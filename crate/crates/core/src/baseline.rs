//! Text-level negatives: reorder or splice whole utterances without looking
//! inside their graphs.
//!
//! Each primitive returns the same `(Conversation, steps)` pair as the
//! semantic manipulations. Reorderings are recorded as
//! [`StepParams::Permute`], splices as [`StepParams::Splice`].

use serde::{Deserialize, Serialize};

use crate::dialogue::{
    Conversation, Label, Manipulation, ManipulationRecord, ManipulationStep, SpliceMode, StepParams,
};
use crate::rng::SplitMix64;
use crate::semantic::{apply_step, finish, ManipulationError, StepResult};

pub const PRIMITIVES: [Manipulation; 5] = [
    Manipulation::ShuffleTurns,
    Manipulation::ShuffleSpeaker,
    Manipulation::SwapHalves,
    Manipulation::InsertUtterance,
    Manipulation::ReplaceUtterance,
];

/// Named primitive groups accepted in `baseline.mix` next to primitive names.
pub fn preset(name: &str) -> Option<Vec<Manipulation>> {
    use Manipulation::*;
    match name {
        "shuffling" => Some(vec![ShuffleTurns, ShuffleSpeaker, SwapHalves]),
        "insertion" => Some(vec![InsertUtterance, ReplaceUtterance]),
        "all" => Some(PRIMITIVES.to_vec()),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Primitive or preset names; one primitive is drawn per conversation.
    pub mix: Vec<String>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { mix: vec!["all".into()] }
    }
}

impl BaselineConfig {
    pub fn only(primitives: &[Manipulation]) -> Self {
        BaselineConfig { mix: primitives.iter().map(|m| m.name().to_string()).collect() }
    }

    /// The mix with presets expanded, duplicates dropped, in first-mention
    /// order.
    pub fn primitives(&self) -> Result<Vec<Manipulation>, String> {
        let mut out = Vec::new();
        for name in &self.mix {
            let expanded = match preset(name) {
                Some(group) => group,
                None => {
                    let m: Manipulation = name.parse()?;
                    if !PRIMITIVES.contains(&m) {
                        return Err(format!("`{m}` is not a baseline primitive"));
                    }
                    vec![m]
                }
            };
            for m in expanded {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
        if out.is_empty() {
            return Err("`mix` must name at least one primitive".into());
        }
        Ok(out)
    }
}

fn permute(conv: &Conversation, manipulation: Manipulation, order: Vec<usize>) -> StepResult {
    let step =
        ManipulationStep { manipulation, utterance: 0, touched: Vec::new(), params: StepParams::Permute { order } };
    let next = apply_step(conv, &step)?;
    Ok((next, vec![step]))
}

fn is_identity(order: &[usize]) -> bool {
    order.iter().enumerate().all(|(i, &j)| i == j)
}

/// Uniformly random reordering of all utterances other than the identity.
pub fn shuffle_turns(conv: &Conversation, rng: &mut SplitMix64) -> StepResult {
    let n = conv.utterances.len();
    if n < 2 {
        return Err(ManipulationError::not_applicable(Manipulation::ShuffleTurns, "needs at least two utterances"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    while is_identity(&order) {
        rng.shuffle(&mut order);
    }
    permute(conv, Manipulation::ShuffleTurns, order)
}

/// Reorders one speaker's utterances among the positions that speaker
/// occupies.
pub fn shuffle_speaker(conv: &Conversation, rng: &mut SplitMix64) -> StepResult {
    let mut speakers: Vec<&str> = Vec::new();
    for s in conv.speakers() {
        if !speakers.contains(&s) && conv.speakers().iter().filter(|t| **t == s).count() >= 2 {
            speakers.push(s);
        }
    }
    let Some(&speaker) = rng.choose(&speakers) else {
        return Err(ManipulationError::not_applicable(Manipulation::ShuffleSpeaker, "no speaker has two utterances"));
    };
    let positions: Vec<usize> =
        conv.utterances.iter().enumerate().filter(|(_, u)| u.speaker == speaker).map(|(i, _)| i).collect();
    let mut shuffled = positions.clone();
    while shuffled == positions {
        rng.shuffle(&mut shuffled);
    }
    let mut order: Vec<usize> = (0..conv.utterances.len()).collect();
    for (&slot, &from) in positions.iter().zip(&shuffled) {
        order[slot] = from;
    }
    permute(conv, Manipulation::ShuffleSpeaker, order)
}

/// Moves the second half in front of the first, splitting after
/// `ceil(n / 2)` utterances.
pub fn swap_halves(conv: &Conversation) -> StepResult {
    let n = conv.utterances.len();
    if n < 2 {
        return Err(ManipulationError::not_applicable(Manipulation::SwapHalves, "needs at least two utterances"));
    }
    let half = n.div_ceil(2);
    permute(conv, Manipulation::SwapHalves, (half..n).chain(0..half).collect())
}

/// Inserts or overwrites one utterance with an utterance of a different
/// conversation from `corpus`, all positions and donors uniform.
pub fn inject_random_utterance(
    conv: &Conversation,
    corpus: &[Conversation],
    mode: SpliceMode,
    rng: &mut SplitMix64,
) -> StepResult {
    let manipulation = match mode {
        SpliceMode::Insert => Manipulation::InsertUtterance,
        SpliceMode::Replace => Manipulation::ReplaceUtterance,
    };
    let donors: Vec<&Conversation> = corpus.iter().filter(|c| c.id != conv.id && !c.utterances.is_empty()).collect();
    let Some(&donor) = rng.choose(&donors) else {
        return Err(ManipulationError::not_applicable(manipulation, "no other conversation to draw from"));
    };
    if mode == SpliceMode::Replace && conv.utterances.is_empty() {
        return Err(ManipulationError::not_applicable(manipulation, "nothing to replace"));
    }
    let donor_utterance = rng.index(donor.utterances.len());
    let position = match mode {
        SpliceMode::Insert => rng.index(conv.utterances.len() + 1),
        SpliceMode::Replace => rng.index(conv.utterances.len()),
    };
    let step = ManipulationStep {
        manipulation,
        utterance: position,
        touched: Vec::new(),
        params: StepParams::Splice { mode, position, donor_conversation: donor.id.clone(), donor_utterance },
    };
    let next = apply_splice(conv, &step, donor)?;
    Ok((next, vec![step]))
}

/// Applies a [`StepParams::Splice`] step given its donor conversation.
pub fn apply_splice(
    conv: &Conversation,
    step: &ManipulationStep,
    donor: &Conversation,
) -> Result<Conversation, ManipulationError> {
    let StepParams::Splice { mode, position, donor_conversation, donor_utterance } = &step.params else {
        return Err(ManipulationError::BadStep("not a splice".into()));
    };
    if *donor_conversation != donor.id {
        return Err(ManipulationError::BadStep(format!("expected donor `{donor_conversation}`, got `{}`", donor.id)));
    }
    let utterance = donor
        .utterances
        .get(*donor_utterance)
        .ok_or_else(|| ManipulationError::BadStep(format!("donor has no utterance {donor_utterance}")))?
        .clone();
    let mut out = conv.clone();
    match mode {
        SpliceMode::Insert if *position <= out.utterances.len() => out.utterances.insert(*position, utterance),
        SpliceMode::Replace if *position < out.utterances.len() => out.utterances[*position] = utterance,
        _ => return Err(ManipulationError::BadStep(format!("position {position} out of range"))),
    }
    Ok(out)
}

/// Runs one primitive.
pub fn apply_primitive(
    primitive: Manipulation,
    conv: &Conversation,
    corpus: &[Conversation],
    rng: &mut SplitMix64,
) -> StepResult {
    match primitive {
        Manipulation::ShuffleTurns => shuffle_turns(conv, rng),
        Manipulation::ShuffleSpeaker => shuffle_speaker(conv, rng),
        Manipulation::SwapHalves => swap_halves(conv),
        Manipulation::InsertUtterance => inject_random_utterance(conv, corpus, SpliceMode::Insert, rng),
        Manipulation::ReplaceUtterance => inject_random_utterance(conv, corpus, SpliceMode::Replace, rng),
        other => Err(ManipulationError::Config(format!("`{other}` is not a baseline primitive"))),
    }
}

/// Applies one primitive drawn from the mix, falling back to the others in
/// random order when it does not apply. Seeded per conversation like the
/// semantic pipeline.
pub fn apply_baseline(
    conv: &Conversation,
    corpus: &[Conversation],
    config: &BaselineConfig,
    seed: u64,
) -> Result<(Conversation, ManipulationRecord), ManipulationError> {
    if conv.label == Some(Label::Incoherent) {
        return Err(ManipulationError::BadStep(format!("conversation `{}` is already incoherent", conv.id)));
    }
    let mut order = config.primitives().map_err(ManipulationError::Config)?;
    let mut rng = SplitMix64::for_conversation(seed, &conv.id);
    rng.shuffle(&mut order);
    let mut base = conv.clone();
    base.record = None;
    let mut record = ManipulationRecord { conversation_id: conv.id.clone(), seed, steps: Vec::new() };
    for primitive in order {
        match apply_primitive(primitive, &base, corpus, &mut rng) {
            Ok((next, steps)) => {
                record.steps = steps;
                return Ok((finish(next, record.clone()), record));
            }
            Err(ManipulationError::NotApplicable { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((finish(base, record.clone()), record))
}

/// Replays any record, resolving splice donors through `lookup`.
pub fn replay_with<'a>(
    original: &Conversation,
    record: &ManipulationRecord,
    lookup: impl Fn(&str) -> Option<&'a Conversation>,
) -> Result<Conversation, ManipulationError> {
    let mut conv = original.clone();
    conv.record = None;
    for step in &record.steps {
        conv = match &step.params {
            StepParams::Splice { donor_conversation, .. } => {
                let donor = lookup(donor_conversation)
                    .ok_or_else(|| ManipulationError::BadStep(format!("unknown donor `{donor_conversation}`")))?;
                apply_splice(&conv, step, donor)?
            }
            _ => apply_step(&conv, step)?,
        };
    }
    Ok(finish(conv, record.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::parse;
    use crate::dialogue::Utterance;
    use crate::fixtures;

    fn numbered(id: &str, speakers: &[&str]) -> Conversation {
        let utterances = speakers
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut u = Utterance::new(*s, parse(&format!("(n / number-{i:02})")).unwrap());
                u.text = Some(format!("{id}-{i}"));
                u
            })
            .collect();
        Conversation::new(id, utterances)
    }

    fn texts(conv: &Conversation) -> Vec<&str> {
        conv.utterances.iter().map(|u| u.text.as_deref().unwrap()).collect()
    }

    #[test]
    fn two_turns_always_swap() {
        let c = numbered("c", &["A", "B"]);
        for seed in 0..20 {
            let (out, _) = shuffle_turns(&c, &mut SplitMix64::new(seed)).unwrap();
            assert_eq!(texts(&out), ["c-1", "c-0"]);
        }
    }

    #[test]
    fn shuffles_keep_the_multiset() {
        let c = numbered("c", &["A", "B", "A", "B", "A", "B", "A"]);
        for seed in 0..100 {
            let mut rng = SplitMix64::new(seed);
            let (out, _) = shuffle_turns(&c, &mut rng).unwrap();
            let mut got = texts(&out);
            assert_ne!(got, texts(&c));
            got.sort();
            assert_eq!(got, texts(&c));

            let (out, _) = shuffle_speaker(&c, &mut rng).unwrap();
            assert_eq!(out.speakers(), c.speakers());
            let moved: Vec<usize> = (0..7).filter(|&i| out.utterances[i] != c.utterances[i]).collect();
            assert!(moved.len() >= 2);
            assert!(moved.iter().all(|&i| c.utterances[i].speaker == c.utterances[moved[0]].speaker));
        }
    }

    #[test]
    fn speaker_shuffle_on_alternating_four() {
        let c = numbered("c", &["A", "B", "A", "B"]);
        let (out, steps) = shuffle_speaker(&c, &mut SplitMix64::new(0)).unwrap();
        let swapped = [texts(&out) == ["c-2", "c-1", "c-0", "c-3"], texts(&out) == ["c-0", "c-3", "c-2", "c-1"]];
        assert!(swapped.iter().any(|s| *s), "{:?}", texts(&out));
        assert_eq!(steps[0].manipulation, Manipulation::ShuffleSpeaker);
        assert!(shuffle_speaker(&numbered("d", &["A", "B"]), &mut SplitMix64::new(0)).is_err());
    }

    #[test]
    fn halves() {
        let c = numbered("c", &["A", "B", "A", "B"]);
        let (out, _) = swap_halves(&c).unwrap();
        assert_eq!(texts(&out), ["c-2", "c-3", "c-0", "c-1"]);
        let (back, _) = swap_halves(&out).unwrap();
        assert_eq!(back.utterances, c.utterances);
        let (odd, _) = swap_halves(&numbered("c", &["A", "B", "A", "B", "A"])).unwrap();
        assert_eq!(texts(&odd), ["c-3", "c-4", "c-0", "c-1", "c-2"]);
        assert!(swap_halves(&numbered("c", &["A"])).is_err());
    }

    #[test]
    fn splices() {
        let corpus = vec![numbered("c", &["A", "B", "A", "B"]), numbered("d", &["A", "B", "A"])];
        let c = &corpus[0];
        for seed in 0..50 {
            let mut rng = SplitMix64::new(seed);
            let (out, steps) = inject_random_utterance(c, &corpus, SpliceMode::Replace, &mut rng).unwrap();
            assert_eq!(out.utterances.len(), 4);
            assert_eq!((0..4).filter(|&i| out.utterances[i] != c.utterances[i]).count(), 1);
            let StepParams::Splice { donor_conversation, .. } = &steps[0].params else { panic!() };
            assert_eq!(donor_conversation, "d");

            let (out, _) = inject_random_utterance(c, &corpus, SpliceMode::Insert, &mut rng).unwrap();
            assert_eq!(out.utterances.len(), 5);
            let kept: Vec<&str> = texts(&out).into_iter().filter(|t| t.starts_with("c-")).collect();
            assert_eq!(kept, texts(c));
        }
        let alone = [c.clone()];
        assert!(inject_random_utterance(c, &alone, SpliceMode::Insert, &mut SplitMix64::new(0)).is_err());
    }

    #[test]
    fn mix_parsing() {
        assert_eq!(BaselineConfig::default().primitives().unwrap(), PRIMITIVES);
        let mix = BaselineConfig { mix: vec!["swap_halves".into(), "shuffling".into()] };
        assert_eq!(
            mix.primitives().unwrap(),
            [Manipulation::SwapHalves, Manipulation::ShuffleTurns, Manipulation::ShuffleSpeaker]
        );
        assert!(BaselineConfig { mix: vec!["contradiction".into()] }.primitives().is_err());
        assert!(BaselineConfig { mix: vec![] }.primitives().is_err());
        assert!(BaselineConfig { mix: vec!["nope".into()] }.primitives().is_err());
    }

    #[test]
    fn pipeline_replays() {
        let corpus = vec![fixtures::sesame_street(), numbered("d", &["A", "B", "A"])];
        let config = BaselineConfig::default();
        for seed in 0..100 {
            let (out, record) = apply_baseline(&corpus[0], &corpus, &config, seed).unwrap();
            assert_eq!(record.steps.len(), 1);
            assert_eq!(out.label, Some(Label::Incoherent));
            let lookup = |id: &str| corpus.iter().find(|c| c.id == id);
            assert_eq!(replay_with(&corpus[0], &record, lookup).unwrap(), out);
        }
    }
}
