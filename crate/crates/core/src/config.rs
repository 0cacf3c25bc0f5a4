//! TOML configuration for the command-line pipeline. Credentials never live
//! here; they are read from environment variables by the remote clients.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::corpus::{CleaningRules, DEFAULT_CHUNK_SIZE, DEFAULT_OVERLAP};
use crate::embedding::EmbeddingProviderConfig;
use crate::error::{Error, Result};
use crate::eval::EvalSettings;
use crate::jsonl;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathsConfig {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub logs: Option<PathBuf>,
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CliConfig {
    pub chunk_size: usize,
    pub overlap: usize,
    pub cleaning: CleaningRules,
    pub embedding: EmbeddingProviderConfig,
    pub agent: AgentConfig,
    pub metrics: EvalSettings,
    pub paths: PathsConfig,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            chunk_size: DEFAULT_CHUNK_SIZE,
            overlap: DEFAULT_OVERLAP,
            cleaning: CleaningRules::rfc_defaults(),
            embedding: EmbeddingProviderConfig::default(),
            agent: AgentConfig::default(),
            metrics: EvalSettings::default(),
            paths: PathsConfig::default(),
        }
    }
}

impl CliConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&jsonl::read_text(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk_size must be at least 1".into()));
        }
        if self.embedding.dimension == 0 {
            return Err(Error::Config("embedding.dimension must be positive".into()));
        }
        if !(1..=4).contains(&self.metrics.metrics.max_n) {
            return Err(Error::Config("metrics.max_n must be in 1..=4".into()));
        }
        self.agent.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::ScoringMode;
    use crate::metrics::RougeVariant;

    #[test]
    fn defaults() {
        let c = CliConfig::from_toml("").unwrap();
        assert_eq!(c.chunk_size, 1000);
        assert_eq!(c.overlap, 200);
        assert_eq!(c.agent.k, 5);
        assert_eq!(c.agent.max_iterations, 5);
        assert_eq!(c.agent.temperature, 0.0);
        assert_eq!(c.metrics.metrics.max_n, 4);
        assert!(c.metrics.metrics.smoothing);
        assert_eq!(c.metrics.metrics.rouge_variant, RougeVariant::N(1));
        assert_eq!(c.embedding.dimension, 1536);
    }

    #[test]
    fn overrides() {
        let c = CliConfig::from_toml(
            r#"
chunk_size = 50
[embedding]
dimension = 64
[agent]
k = 3
stop_marker = "ANSWER:"
[metrics]
max_n = 2
rouge_variant = "rouge-l"
mode = "whole-answer"
[paths]
index = "idx.jsonl"
"#,
        )
        .unwrap();
        assert_eq!(c.chunk_size, 50);
        assert_eq!(c.embedding.dimension, 64);
        assert_eq!(c.agent.k, 3);
        assert_eq!(c.agent.stop_marker, "ANSWER:");
        assert_eq!(c.metrics.metrics.max_n, 2);
        assert_eq!(c.metrics.metrics.rouge_variant, RougeVariant::L);
        assert_eq!(c.metrics.mode, ScoringMode::WholeAnswer);
        assert_eq!(c.paths.index.as_deref(), Some(Path::new("idx.jsonl")));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(CliConfig::from_toml("chunk_size = 0").is_err());
        assert!(CliConfig::from_toml("[agent]\nk = 0").is_err());
        assert!(CliConfig::from_toml("[metrics]\nmax_n = 7").is_err());
        assert!(CliConfig::from_toml("[metrics]\nrouge_variant = \"bogus\"").is_err());
    }
}
