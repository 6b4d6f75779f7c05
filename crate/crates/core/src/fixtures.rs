//! A worked four-turn conversation about Sesame Street, before and after one
//! scripted pass of every semantic manipulation. Used by tests, the guide and
//! the CLI smoke checks.
//!
//! The after-graphs differ from the before-graphs in four places: `watch-01`
//! became `listen-01` in turn 1; the first `he` of turn 3 became `they`; the
//! question sentence of turn 3 was removed; turn 4 gained copies of turn 2's
//! sentences with `like-01` swapped for `hate-01` and `seem-01` negated.

use crate::amr::{parse, AmrGraph};
use crate::dialogue::{Conversation, Label, Utterance};

pub const ORIGINAL_PENMAN: &str = include_str!("../data/sesame/original.penman");
pub const MANIPULATED_PENMAN: &str = include_str!("../data/sesame/manipulated.penman");

/// Splits a fixture file into `(speaker, penman)` blocks.
pub fn blocks(text: &str) -> Vec<(String, String)> {
    text.split("\n\n")
        .filter(|b| !b.trim().is_empty())
        .map(|block| {
            let speaker =
                block.lines().find_map(|l| l.trim().strip_prefix("# ::speaker ")).unwrap_or("A").trim().to_string();
            let body: Vec<&str> = block.lines().filter(|l| !l.trim_start().starts_with('#')).collect();
            (speaker, body.join("\n"))
        })
        .collect()
}

fn conversation(id: &str, text: &str) -> Conversation {
    let utterances = blocks(text)
        .into_iter()
        .map(|(speaker, penman)| Utterance::new(speaker, parse(&penman).expect("fixture graphs parse")))
        .collect();
    Conversation::new(id, utterances)
}

/// The coherent conversation.
pub fn sesame_street() -> Conversation {
    conversation("sesame-street", ORIGINAL_PENMAN).with_label(Label::Coherent)
}

/// The expected result of the scripted manipulations, without a record.
pub fn sesame_street_manipulated() -> Conversation {
    conversation("sesame-street", MANIPULATED_PENMAN).with_label(Label::Incoherent)
}

/// Every fixture graph, original then manipulated.
pub fn all_graphs() -> Vec<AmrGraph> {
    sesame_street().utterances.into_iter().chain(sesame_street_manipulated().utterances).map(|u| u.amr).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amr::{depth, find_nodes, serialize, validate, NodePredicate, PronounInventory, Style};

    fn squash(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn every_graph_validates_and_round_trips_textually() {
        for text in [ORIGINAL_PENMAN, MANIPULATED_PENMAN] {
            for (_, penman) in blocks(text) {
                let g = parse(&penman).unwrap();
                assert!(validate(&g).ok);
                let printed = serialize(&g, Style::Multiline).unwrap();
                assert_eq!(printed, penman);
                assert_eq!(squash(&serialize(&g, Style::SingleLine).unwrap()), squash(&penman));
            }
        }
    }

    #[test]
    fn speakers_alternate() {
        assert_eq!(sesame_street().speakers(), ["A", "B", "A", "B"]);
    }

    #[test]
    fn question_marker_in_first_turn() {
        let c = sesame_street();
        assert_eq!(find_nodes(&c.utterances[0].amr, &NodePredicate::question()), ["a"]);
        assert_eq!(depth(&c.utterances[0].amr), 2);
    }

    #[test]
    fn pronouns_in_third_turn() {
        let c = sesame_street();
        let inventory = PronounInventory::new(["i", "he"]);
        let hits = find_nodes(&c.utterances[2].amr, &NodePredicate::Pronoun(&inventory));
        assert_eq!(hits, ["h", "ii2", "h3", "ii3"]);
    }

    #[test]
    fn printed_final_graph_is_not_well_formed() {
        // As printed, the manipulated last turn declares `h` three times.
        let printed = "(m / multi-sentence :snt1 (h / have-concession-91 :ARG1 (o / orange :domain (h2 / he) :time (o2 / once))) :snt3 (h / hate-01))";
        assert!(parse(printed).is_err());
    }
}
