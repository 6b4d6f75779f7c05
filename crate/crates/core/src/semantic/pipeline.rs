use crate::dialogue::{Conversation, Label, Manipulation, ManipulationRecord};
use crate::knowledge::AntonymLexicon;
use crate::rng::SplitMix64;

use super::{
    contradict, coref_inconsistency, decrease_engagement, finish, irrelevancy, DonorPool, ManipulationConfig,
    ManipulationError, StepResult,
};

/// Number of manipulations to apply, uniform in `min_ops..=max_ops`.
pub fn draw_op_count(config: &ManipulationConfig, rng: &mut SplitMix64) -> usize {
    rng.range_inclusive(config.min_ops, config.max_ops)
}

/// Everything a semantic manipulation may need besides the conversation.
#[derive(Debug, Clone, Copy)]
pub struct Manipulator<'a> {
    pub lexicon: &'a AntonymLexicon,
    pub config: &'a ManipulationConfig,
    pub donors: Option<&'a DonorPool>,
}

impl<'a> Manipulator<'a> {
    pub fn new(lexicon: &'a AntonymLexicon, config: &'a ManipulationConfig) -> Self {
        Manipulator { lexicon, config, donors: None }
    }

    pub fn with_donors(self, donors: &'a DonorPool) -> Self {
        Manipulator { donors: Some(donors), ..self }
    }

    /// Runs one manipulation with its default choices.
    pub fn apply(&self, manipulation: Manipulation, conv: &Conversation, rng: &mut SplitMix64) -> StepResult {
        match manipulation {
            Manipulation::Contradiction => contradict(conv, self.lexicon, self.config, rng),
            Manipulation::Coreference => coref_inconsistency(conv, self.config, rng),
            Manipulation::Irrelevancy => irrelevancy(conv, self.config, self.donors, rng),
            Manipulation::Engagement => decrease_engagement(conv, self.config, None, rng),
            other => Err(ManipulationError::Config(format!("`{other}` is not a semantic manipulation"))),
        }
    }

    /// Draws k manipulations without replacement from the enabled set and
    /// applies them in the order drawn. A manipulation that finds nothing to
    /// act on is replaced by the next one drawn. When none applies the
    /// conversation comes back unchanged with an empty record.
    pub fn run(&self, conv: &Conversation, seed: u64) -> Result<(Conversation, ManipulationRecord), ManipulationError> {
        if conv.label == Some(Label::Incoherent) {
            return Err(ManipulationError::BadStep(format!("conversation `{}` is already incoherent", conv.id)));
        }
        self.config.validate().map_err(ManipulationError::Config)?;
        let mut rng = SplitMix64::for_conversation(seed, &conv.id);
        let k = draw_op_count(self.config, &mut rng);
        let mut order = self.config.enabled.clone();
        rng.shuffle(&mut order);

        let mut current = conv.clone();
        current.record = None;
        let mut record = ManipulationRecord { conversation_id: conv.id.clone(), seed, steps: Vec::new() };
        let mut applied = 0;
        for manipulation in order {
            if applied == k {
                break;
            }
            match self.apply(manipulation, &current, &mut rng) {
                Ok((next, steps)) if !steps.is_empty() => {
                    current = next;
                    record.steps.extend(steps);
                    applied += 1;
                }
                Ok(_) | Err(ManipulationError::NotApplicable { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok((finish(current, record.clone()), record))
    }
}

/// [`Manipulator::run`] without a donor pool.
pub fn apply_pipeline(
    conv: &Conversation,
    config: &ManipulationConfig,
    lexicon: &AntonymLexicon,
    seed: u64,
) -> Result<(Conversation, ManipulationRecord), ManipulationError> {
    Manipulator::new(lexicon, config).run(conv, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::parse;
    use crate::dialogue::{to_line, Utterance};
    use crate::fixtures;
    use crate::semantic::replay;

    #[test]
    fn deterministic_and_replayable() {
        let conv = fixtures::sesame_street();
        let lexicon = AntonymLexicon::bundled();
        let config = ManipulationConfig::default();
        for seed in 0..200 {
            let (a, record) = apply_pipeline(&conv, &config, &lexicon, seed).unwrap();
            let (b, _) = apply_pipeline(&conv, &config, &lexicon, seed).unwrap();
            assert_eq!(to_line(&a), to_line(&b));
            assert_eq!(a.label, Some(Label::Incoherent));
            let ops = record.manipulations();
            assert!((1..=3).contains(&ops.len()), "{ops:?}");
            assert_eq!(to_line(&replay(&conv, &record).unwrap()), to_line(&a));
        }
    }

    #[test]
    fn ablation_excludes_disabled_manipulations() {
        let conv = fixtures::sesame_street();
        let lexicon = AntonymLexicon::bundled();
        let config =
            ManipulationConfig::only(&[Manipulation::Coreference, Manipulation::Irrelevancy, Manipulation::Engagement]);
        for seed in 0..200 {
            let (_, record) = apply_pipeline(&conv, &config, &lexicon, seed).unwrap();
            assert!(!record.manipulations().contains(&Manipulation::Contradiction));
        }
    }

    #[test]
    fn nothing_applicable_leaves_conversation_unchanged() {
        let conv = Conversation::new("c", vec![Utterance::new("A", parse("(o / ok)").unwrap())]);
        let (out, record) =
            apply_pipeline(&conv, &ManipulationConfig::default(), &AntonymLexicon::bundled(), 1).unwrap();
        assert!(record.steps.is_empty());
        assert_eq!(out.utterances, conv.utterances);
        assert_eq!(out.label, None);
    }

    #[test]
    fn incoherent_input_is_rejected() {
        let conv = fixtures::sesame_street_manipulated();
        assert!(apply_pipeline(&conv, &ManipulationConfig::default(), &AntonymLexicon::bundled(), 1).is_err());
    }

    #[test]
    fn op_count_covers_its_range() {
        let config = ManipulationConfig::default();
        let mut rng = SplitMix64::new(11);
        let mut seen = [0usize; 4];
        for _ in 0..3000 {
            seen[draw_op_count(&config, &mut rng)] += 1;
        }
        assert_eq!(seen[0], 0);
        assert!(seen[1..].iter().all(|&n| n > 900));
    }
}
