//! TOML configuration for both manipulation families.
//!
//! ```toml
//! [deam]
//! enabled = ["contradiction", "coreference", "irrelevancy", "engagement"]
//! min_ops = 1
//! max_ops = 3
//! irrelevancy_items = [1, 3]
//!
//! [deam.engagement_weights]
//! question = 1.0
//! deepest = 1.0
//! arguments = 2.0
//!
//! [baseline]
//! mix = ["shuffle_turns", "insertion"]
//! ```
//!
//! Every key is optional; missing ones take their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineConfig;
use crate::semantic::ManipulationConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub deam: ManipulationConfig,
    pub baseline: BaselineConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.deam.validate().map_err(|e| ConfigError::Invalid(format!("[deam] {e}")))?;
        self.baseline.primitives().map_err(|e| ConfigError::Invalid(format!("[baseline] {e}")))?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
