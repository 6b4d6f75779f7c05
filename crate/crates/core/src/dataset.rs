//! Negative generation over a corpus, shared by the command line and tests.
//!
//! Every conversation is handled on its own seeded stream, so results are
//! the same whatever order or thread conversations are processed on.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::baseline::{self, apply_baseline};
use crate::config::Config;
use crate::dialogue::{Conversation, Label, ManipulationRecord};
use crate::knowledge::AntonymLexicon;
use crate::semantic::{DonorPool, ManipulationError, Manipulator};

pub const NEGATIVE_SUFFIX: &str = "#neg";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The four graph-level manipulations.
    Deam,
    /// Utterance shuffling and splicing.
    Baseline,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deam" => Ok(Mode::Deam),
            "baseline" => Ok(Mode::Baseline),
            _ => Err(format!("unknown mode `{s}` (expected deam or baseline)")),
        }
    }
}

/// Outcome for one positive.
#[derive(Debug, Clone, PartialEq)]
pub enum Pair {
    /// The positive, labelled coherent, and its negative.
    Both(Conversation, Conversation),
    /// No manipulation applied; the positive is left out.
    Skipped(String),
}

pub struct NegativeSampler<'a> {
    mode: Mode,
    config: &'a Config,
    lexicon: &'a AntonymLexicon,
    /// Splice donors for the baseline, donor pool source for widened
    /// irrelevancy.
    corpus: &'a [Conversation],
    donors: Option<DonorPool>,
    seed: u64,
}

impl<'a> NegativeSampler<'a> {
    pub fn new(
        mode: Mode,
        config: &'a Config,
        lexicon: &'a AntonymLexicon,
        corpus: &'a [Conversation],
        seed: u64,
    ) -> Self {
        let donors = (mode == Mode::Deam && config.deam.widen_donors).then(|| DonorPool::from_conversations(corpus));
        NegativeSampler { mode, config, lexicon, corpus, donors, seed }
    }

    /// Manipulates one conversation. An empty record means nothing applied
    /// and the conversation is returned unchanged.
    pub fn manipulate(&self, conv: &Conversation) -> Result<(Conversation, ManipulationRecord), ManipulationError> {
        match self.mode {
            Mode::Deam => {
                let mut m = Manipulator::new(self.lexicon, &self.config.deam);
                if let Some(pool) = &self.donors {
                    m = m.with_donors(pool);
                }
                m.run(conv, self.seed)
            }
            Mode::Baseline => apply_baseline(conv, self.corpus, &self.config.baseline, self.seed),
        }
    }

    /// The positive and one negative made from it. The negative's id is the
    /// positive's plus [`NEGATIVE_SUFFIX`].
    pub fn pair(&self, conv: &Conversation) -> Result<Pair, ManipulationError> {
        let mut positive = conv.clone();
        positive.label = Some(Label::Coherent);
        positive.record = None;
        let (mut negative, record) = self.manipulate(&positive)?;
        if record.steps.is_empty() {
            return Ok(Pair::Skipped(conv.id.clone()));
        }
        negative.id.push_str(NEGATIVE_SUFFIX);
        Ok(Pair::Both(positive, negative))
    }
}

/// Replays a record of either family against `corpus` for splice donors.
pub fn replay(
    original: &Conversation,
    record: &ManipulationRecord,
    corpus: &[Conversation],
) -> Result<Conversation, ManipulationError> {
    let index: HashMap<&str, &Conversation> = corpus.iter().map(|c| (c.id.as_str(), c)).collect();
    baseline::replay_with(original, record, |id| index.get(id).copied())
}
