//! Contradiction candidates drawn from ConceptNet-style relation triples.
//!
//! Input rows are `relation<TAB>lemma_a<TAB>lemma_b`. Plain names (`Antonym`,
//! `like`) and ConceptNet URIs (`/r/Antonym`, `/c/en/like/v`) are both
//! accepted. Only four relations survive loading: `Antonym`, which is stored
//! in both directions, and `NotDesires`, `NotCapableOf`, `NotHasProperty`,
//! which keep their direction.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

const BUNDLED: &str = include_str!("../data/lexicon.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    Antonym,
    NotDesires,
    NotCapableOf,
    NotHasProperty,
}

impl Relation {
    fn parse(name: &str) -> Option<Relation> {
        match name.strip_prefix("/r/").unwrap_or(name) {
            "Antonym" => Some(Relation::Antonym),
            "NotDesires" => Some(Relation::NotDesires),
            "NotCapableOf" => Some(Relation::NotCapableOf),
            "NotHasProperty" => Some(Relation::NotHasProperty),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected 3 tab-separated columns, found {columns}")]
    Malformed { line: usize, columns: usize },
}

/// Splits a PropBank sense suffix off a concept: `like-01` gives
/// `("like", Some("-01"))`, `orange` gives `("orange", None)`.
pub fn split_sense(concept: &str) -> (&str, Option<&str>) {
    if crate::amr::is_predicate(concept) {
        let at = concept.len() - 3;
        (&concept[..at], Some(&concept[at..]))
    } else {
        (concept, None)
    }
}

/// Lowercased lemma without sense suffix. ConceptNet URIs keep only their
/// English term; other languages yield `None`.
pub fn normalize_lemma(raw: &str) -> Option<String> {
    let term = match raw.strip_prefix("/c/") {
        Some(rest) => {
            let mut parts = rest.split('/');
            if parts.next()? != "en" {
                return None;
            }
            parts.next()?
        }
        None => raw,
    };
    let lowered = term.trim().to_lowercase().replace(['_', ' '], "-");
    let (lemma, _) = split_sense(&lowered);
    (!lemma.is_empty()).then(|| lemma.to_string())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AntonymLexicon {
    entries: BTreeMap<String, BTreeSet<(String, Relation)>>,
}

impl AntonymLexicon {
    pub fn load<R: BufRead>(reader: R) -> Result<Self, LexiconError> {
        let mut lexicon = AntonymLexicon::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').collect();
            if cols.len() != 3 {
                return Err(LexiconError::Malformed { line: i + 1, columns: cols.len() });
            }
            let Some(relation) = Relation::parse(cols[0].trim()) else { continue };
            let (Some(a), Some(b)) = (normalize_lemma(cols[1]), normalize_lemma(cols[2])) else { continue };
            lexicon.insert(&a, &b, relation);
            if relation == Relation::Antonym {
                lexicon.insert(&b, &a, relation);
            }
        }
        Ok(lexicon)
    }

    /// The curated extract shipped with the crate.
    pub fn bundled() -> Self {
        Self::load(BUNDLED.as_bytes()).expect("bundled lexicon is well-formed")
    }

    fn insert(&mut self, from: &str, to: &str, relation: Relation) {
        if from != to {
            self.entries.entry(from.to_string()).or_default().insert((to.to_string(), relation));
        }
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Raw entries for a normalized lemma.
    pub fn relations_of(&self, lemma: &str) -> impl Iterator<Item = &(String, Relation)> {
        self.entries.get(lemma).into_iter().flatten()
    }

    /// Contradiction candidates for a concept. The sense suffix is ignored
    /// for lookup and copied onto every candidate (`like-01` gives
    /// `hate-01`). Case-insensitive.
    pub fn antonyms_of(&self, concept: &str) -> BTreeSet<String> {
        let lowered = concept.to_lowercase();
        let (lemma, sense) = split_sense(&lowered);
        self.relations_of(lemma).map(|(b, _)| format!("{b}{}", sense.unwrap_or_default())).collect()
    }

    pub fn covers(&self, concept: &str) -> bool {
        !self.antonyms_of(concept).is_empty()
    }
}
