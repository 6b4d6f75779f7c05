//! Conversations as sequences of speaker-attributed utterance graphs, and the
//! line-delimited JSON corpus format that carries them.
//!
//! One conversation per line:
//!
//! ```text
//! {"id":"c1","label":"coherent","utterances":[{"speaker":"A","text":"hi","amr":"(h / hi)"}]}
//! ```
//!
//! `label`, `text` and `record` are optional. AMRs are single-line PENMAN.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::amr::{self, AmrError, AmrGraph, Style};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Coherent,
    Incoherent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub speaker: String,
    pub text: Option<String>,
    pub amr: AmrGraph,
}

impl Utterance {
    pub fn new(speaker: impl Into<String>, amr: AmrGraph) -> Self {
        Utterance { speaker: speaker.into(), text: None, amr }
    }

    /// See [`amr::sentence_units`].
    pub fn sentence_units(&self) -> Vec<(usize, String)> {
        amr::sentence_units(&self.amr)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conversation {
    pub id: String,
    pub utterances: Vec<Utterance>,
    pub label: Option<Label>,
    pub record: Option<ManipulationRecord>,
}

impl Conversation {
    pub fn new(id: impl Into<String>, utterances: Vec<Utterance>) -> Self {
        Conversation { id: id.into(), utterances, label: None, record: None }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    pub fn speakers(&self) -> Vec<&str> {
        self.utterances.iter().map(|u| u.speaker.as_str()).collect()
    }

    pub fn node_count(&self) -> usize {
        self.utterances.iter().map(|u| u.amr.node_count()).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.utterances.iter().map(|u| u.amr.edge_count()).sum()
    }
}

/// Name of a manipulation, semantic or baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manipulation {
    Contradiction,
    Coreference,
    Irrelevancy,
    Engagement,
    ShuffleTurns,
    ShuffleSpeaker,
    SwapHalves,
    InsertUtterance,
    ReplaceUtterance,
}

impl Manipulation {
    pub const SEMANTIC: [Manipulation; 4] =
        [Manipulation::Contradiction, Manipulation::Coreference, Manipulation::Irrelevancy, Manipulation::Engagement];

    pub fn name(self) -> &'static str {
        match self {
            Manipulation::Contradiction => "contradiction",
            Manipulation::Coreference => "coreference",
            Manipulation::Irrelevancy => "irrelevancy",
            Manipulation::Engagement => "engagement",
            Manipulation::ShuffleTurns => "shuffle_turns",
            Manipulation::ShuffleSpeaker => "shuffle_speaker",
            Manipulation::SwapHalves => "swap_halves",
            Manipulation::InsertUtterance => "insert_utterance",
            Manipulation::ReplaceUtterance => "replace_utterance",
        }
    }
}

impl std::fmt::Display for Manipulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Manipulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown manipulation `{s}`"))
    }
}

/// How a copied sentence is contradicted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContradictionEdit {
    /// Relabel the head concept with an antonym.
    Antonym { replacement: String },
    /// Toggle `:polarity -` on the head concept.
    Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceCopy {
    /// `:sntK` index of the copied unit in the source utterance.
    pub unit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edit: Option<ContradictionEdit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpliceMode {
    Insert,
    Replace,
}

/// Concrete, replayable parameters of one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum StepParams {
    ReplaceConcept {
        variable: String,
        from: String,
        to: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        donor_utterance: Option<usize>,
    },
    RemoveSubtree {
        variable: String,
    },
    DropUtterance,
    AppendSentences {
        source_utterance: usize,
        copies: Vec<SentenceCopy>,
    },
    /// Output position `i` holds input utterance `order[i]`.
    Permute {
        order: Vec<usize>,
    },
    Splice {
        mode: SpliceMode,
        position: usize,
        donor_conversation: String,
        donor_utterance: usize,
    },
}

/// One atomic edit on one utterance (or on the utterance order).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManipulationStep {
    pub manipulation: Manipulation,
    pub utterance: usize,
    pub touched: Vec<String>,
    pub params: StepParams,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManipulationRecord {
    pub conversation_id: String,
    pub seed: u64,
    pub steps: Vec<ManipulationStep>,
}

impl ManipulationRecord {
    pub fn manipulations(&self) -> Vec<Manipulation> {
        let mut seen = Vec::new();
        for step in &self.steps {
            if !seen.contains(&step.manipulation) {
                seen.push(step.manipulation);
            }
        }
        seen
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: conversation `{conversation}` utterance {utterance}: {source}")]
    InvalidAmr {
        line: usize,
        conversation: String,
        utterance: usize,
        #[source]
        source: AmrError,
    },
    #[error("line {line}: duplicate conversation id `{id}`")]
    DuplicateId { line: usize, id: String },
}

#[derive(Serialize, Deserialize)]
struct RawUtterance {
    speaker: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    amr: String,
}

#[derive(Serialize, Deserialize)]
struct RawConversation {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<Label>,
    utterances: Vec<RawUtterance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    record: Option<ManipulationRecord>,
}

/// Parses one corpus line. `line` only labels errors.
pub fn parse_line(text: &str, line: usize) -> Result<Conversation, CorpusError> {
    let raw: RawConversation =
        serde_json::from_str(text).map_err(|e| CorpusError::Malformed { line, message: e.to_string() })?;
    if raw.utterances.is_empty() {
        return Err(CorpusError::Malformed { line, message: format!("conversation `{}` has no utterances", raw.id) });
    }
    let mut utterances = Vec::with_capacity(raw.utterances.len());
    for (i, u) in raw.utterances.into_iter().enumerate() {
        if u.speaker.is_empty() {
            return Err(CorpusError::Malformed { line, message: format!("utterance {i} has an empty speaker") });
        }
        let amr = amr::parse(&u.amr).map_err(|source| CorpusError::InvalidAmr {
            line,
            conversation: raw.id.clone(),
            utterance: i,
            source,
        })?;
        utterances.push(Utterance { speaker: u.speaker, text: u.text, amr });
    }
    Ok(Conversation { id: raw.id, utterances, label: raw.label, record: raw.record })
}

/// Serializes one conversation as a corpus line, without the newline.
pub fn to_line(conversation: &Conversation) -> String {
    let raw = RawConversation {
        id: conversation.id.clone(),
        label: conversation.label,
        utterances: conversation
            .utterances
            .iter()
            .map(|u| RawUtterance {
                speaker: u.speaker.clone(),
                text: u.text.clone(),
                amr: amr::serialize(&u.amr, Style::SingleLine).unwrap_or_else(|_| u.amr.to_string()),
            })
            .collect(),
        record: conversation.record.clone(),
    };
    serde_json::to_string(&raw).expect("corpus records always serialize")
}

/// Streams conversations from a corpus, rejecting duplicate ids. Blank lines
/// are skipped.
pub struct CorpusReader<R> {
    lines: std::io::Lines<R>,
    line: usize,
    seen: HashSet<String>,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R) -> Self {
        CorpusReader { lines: reader.lines(), line: 0, seen: HashSet::new() }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Conversation, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(text) => text,
                Err(e) => return Some(Err(e.into())),
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            let line = self.line;
            return Some(parse_line(&text, line).and_then(|c| {
                if self.seen.insert(c.id.clone()) {
                    Ok(c)
                } else {
                    Err(CorpusError::DuplicateId { line, id: c.id })
                }
            }));
        }
    }
}

pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<Conversation>, CorpusError> {
    CorpusReader::new(reader).collect()
}

pub fn write_corpus<'a, W, I>(conversations: I, mut writer: W) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Conversation>,
{
    for conversation in conversations {
        writer.write_all(to_line(conversation).as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn two_line_corpus() -> String {
        [
            r#"{"id":"c1","utterances":[{"speaker":"A","amr":"(h / hello)"},{"speaker":"B","amr":"(h / hi)"}]}"#,
            r#"{"id":"c2","label":"coherent","utterances":[{"speaker":"A","text":"I do.","amr":"(d / do-02 :ARG0 (i / i))"},{"speaker":"B","amr":"(o / ok)"}]}"#,
        ]
        .join("\n")
    }

    #[test]
    fn reads_two_conversations() {
        let corpus = read_corpus(two_line_corpus().as_bytes()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus[0].utterances.len(), 2);
        assert_eq!(corpus[1].label, Some(Label::Coherent));
        assert_eq!(corpus[1].utterances[0].text.as_deref(), Some("I do."));
    }

    #[test]
    fn fixture_third_utterance_has_three_sentences() {
        let line = to_line(&fixtures::sesame_street());
        let corpus = read_corpus(line.as_bytes()).unwrap();
        let third = &corpus[0].utterances[2];
        assert!(third.amr.is_multi_sentence());
        assert_eq!(third.sentence_units().len(), 3);
        assert_eq!(third.sentence_units()[2].1, "w");
    }

    #[test]
    fn unbalanced_amr_names_the_utterance() {
        let text = r#"{"id":"bad","utterances":[{"speaker":"A","amr":"(a / b)"},{"speaker":"B","amr":"(a / b :ARG0 (c / d)"}]}"#;
        match read_corpus(text.as_bytes()) {
            Err(CorpusError::InvalidAmr { line, conversation, utterance, .. }) => {
                assert_eq!((line, conversation.as_str(), utterance), (1, "bad", 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_duplicate_lines() {
        assert!(matches!(read_corpus("{not json".as_bytes()), Err(CorpusError::Malformed { line: 1, .. })));
        let empty = r#"{"id":"e","utterances":[]}"#;
        assert!(matches!(read_corpus(empty.as_bytes()), Err(CorpusError::Malformed { .. })));
        let line = r#"{"id":"d","utterances":[{"speaker":"A","amr":"(a / b)"}]}"#;
        let text = format!("{line}\n\n{line}\n");
        assert!(matches!(read_corpus(text.as_bytes()), Err(CorpusError::DuplicateId { line: 3, .. })));
    }

    #[test]
    fn round_trip_with_labels_and_records() {
        let mut corpus = read_corpus(two_line_corpus().as_bytes()).unwrap();
        corpus[0].label = Some(Label::Incoherent);
        corpus[0].record = Some(ManipulationRecord {
            conversation_id: "c1".into(),
            seed: 7,
            steps: vec![ManipulationStep {
                manipulation: Manipulation::Coreference,
                utterance: 1,
                touched: vec!["h".into()],
                params: StepParams::ReplaceConcept {
                    variable: "h".into(),
                    from: "hi".into(),
                    to: "bye".into(),
                    donor_utterance: None,
                },
            }],
        });
        corpus.push(fixtures::sesame_street());
        let mut out = Vec::new();
        write_corpus(&corpus, &mut out).unwrap();
        let back = read_corpus(out.as_slice()).unwrap();
        assert_eq!(back, corpus);
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains(r#""op":"replace_concept""#));
    }

    #[test]
    fn units_after_removal_are_consecutive() {
        let c = fixtures::sesame_street();
        let third = &c.utterances[2];
        let (_, snt2) = &third.sentence_units()[1];
        let removed = amr::remove_subtree(&third.amr, snt2).unwrap();
        let indices: Vec<usize> = amr::sentence_units(&removed).iter().map(|u| u.0).collect();
        assert_eq!(indices, [1, 2]);
    }

    #[test]
    fn manipulation_names_parse() {
        for m in Manipulation::SEMANTIC {
            assert_eq!(m.name().parse::<Manipulation>().unwrap(), m);
        }
        assert!("bogus".parse::<Manipulation>().is_err());
    }
}
