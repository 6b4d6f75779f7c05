use serde::{Deserialize, Serialize};

use crate::amr::PronounInventory;
use crate::dialogue::Manipulation;

/// Inclusive `[min, max]` count, written as a two-element array in config
/// files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

impl CountRange {
    pub const fn new(min: usize, max: usize) -> Self {
        CountRange { min, max }
    }

    /// Clamps the upper end to `available`; `None` if nothing fits.
    pub fn clamp_to(self, available: usize) -> Option<(usize, usize)> {
        let hi = self.max.min(available);
        (available > 0 && hi >= self.min.max(1)).then_some((self.min.max(1), hi))
    }
}

impl From<[usize; 2]> for CountRange {
    fn from([min, max]: [usize; 2]) -> Self {
        CountRange { min, max }
    }
}

impl From<CountRange> for [usize; 2] {
    fn from(r: CountRange) -> Self {
        [r.min, r.max]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngagementWeights {
    pub question: f64,
    pub deepest: f64,
    pub arguments: f64,
}

impl Default for EngagementWeights {
    fn default() -> Self {
        EngagementWeights { question: 1.0, deepest: 1.0, arguments: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManipulationConfig {
    pub enabled: Vec<Manipulation>,
    pub min_ops: usize,
    pub max_ops: usize,
    pub pronouns: PronounInventory,
    /// Pronoun nodes rewritten per coreference step.
    pub coreference_items: CountRange,
    /// Concepts swapped per irrelevancy step.
    pub irrelevancy_items: CountRange,
    /// `:ARG`/`:op` subtrees removed by the `arguments` engagement strategy.
    pub argument_removals: CountRange,
    /// Sentences contradicted per contradiction step.
    pub contradiction_units: CountRange,
    pub engagement_weights: EngagementWeights,
    /// Let irrelevancy draw donor concepts from the whole corpus instead of
    /// only the conversation being manipulated.
    pub widen_donors: bool,
}

impl Default for ManipulationConfig {
    fn default() -> Self {
        ManipulationConfig {
            enabled: Manipulation::SEMANTIC.to_vec(),
            min_ops: 1,
            max_ops: 3,
            pronouns: PronounInventory::default(),
            coreference_items: CountRange::new(1, 3),
            irrelevancy_items: CountRange::new(1, 3),
            argument_removals: CountRange::new(1, 3),
            contradiction_units: CountRange::new(1, 2),
            engagement_weights: EngagementWeights::default(),
            widen_donors: false,
        }
    }
}

impl ManipulationConfig {
    /// Default configuration with only `enabled` switched on and `max_ops`
    /// capped accordingly.
    pub fn only(enabled: &[Manipulation]) -> Self {
        let mut config = ManipulationConfig { enabled: enabled.to_vec(), ..Default::default() };
        config.max_ops = config.max_ops.min(enabled.len()).max(1);
        config
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.enabled.is_empty() {
            return Err("`enabled` must name at least one manipulation".into());
        }
        for (i, m) in self.enabled.iter().enumerate() {
            if !Manipulation::SEMANTIC.contains(m) {
                return Err(format!("`{m}` is not a semantic manipulation"));
            }
            if self.enabled[..i].contains(m) {
                return Err(format!("`{m}` is enabled twice"));
            }
        }
        if self.min_ops < 1 || self.min_ops > self.max_ops {
            return Err(format!("need 1 <= min_ops <= max_ops, got {}..{}", self.min_ops, self.max_ops));
        }
        if self.max_ops > self.enabled.len() {
            return Err(format!(
                "max_ops ({}) exceeds the number of enabled manipulations ({})",
                self.max_ops,
                self.enabled.len()
            ));
        }
        for (name, r) in [
            ("coreference_items", self.coreference_items),
            ("irrelevancy_items", self.irrelevancy_items),
            ("argument_removals", self.argument_removals),
            ("contradiction_units", self.contradiction_units),
        ] {
            if r.min < 1 || r.min > r.max {
                return Err(format!("`{name}` must satisfy 1 <= min <= max, got [{}, {}]", r.min, r.max));
            }
        }
        let w = self.engagement_weights;
        let weights = [w.question, w.deepest, w.arguments];
        if weights.iter().any(|x| !x.is_finite() || *x < 0.0) || weights.iter().all(|x| *x == 0.0) {
            return Err("engagement weights must be non-negative with at least one positive".into());
        }
        if self.pronouns.len() < 2 {
            return Err("the pronoun inventory needs at least two pronouns".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        ManipulationConfig::default().validate().unwrap();
        ManipulationConfig::only(&[Manipulation::Coreference]).validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            ManipulationConfig { enabled: vec![], ..Default::default() },
            ManipulationConfig { min_ops: 0, ..Default::default() },
            ManipulationConfig { min_ops: 3, max_ops: 2, ..Default::default() },
            ManipulationConfig { max_ops: 5, ..Default::default() },
            ManipulationConfig { enabled: vec![Manipulation::ShuffleTurns], max_ops: 1, ..Default::default() },
            ManipulationConfig {
                enabled: vec![Manipulation::Engagement, Manipulation::Engagement],
                max_ops: 1,
                ..Default::default()
            },
            ManipulationConfig { irrelevancy_items: CountRange::new(2, 1), ..Default::default() },
            ManipulationConfig {
                engagement_weights: EngagementWeights { question: 0.0, deepest: 0.0, arguments: 0.0 },
                ..Default::default()
            },
        ];
        for config in bad {
            assert!(config.validate().is_err(), "{config:?}");
        }
    }

    #[test]
    fn count_range_clamping() {
        assert_eq!(CountRange::new(1, 3).clamp_to(2), Some((1, 2)));
        assert_eq!(CountRange::new(1, 3).clamp_to(0), None);
        assert_eq!(CountRange::new(2, 3).clamp_to(1), None);
    }
}
