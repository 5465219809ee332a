//! Toolkit configuration: a TOML file, overridable by environment
//! variables, overridable again by CLI flags (flags > env > file).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{EndpointConfig, Mode, PromptTemplates};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("environment variable {var}: {detail}")]
    Env { var: String, detail: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppConfig {
    /// Seeds every random choice (retry jitter, fixtures).
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_floor")]
    pub floor_logprob: f64,
    /// Models to query during annotation.
    #[serde(default)]
    pub models: Vec<String>,
    /// Also run the two self-report follow-up turns per item.
    #[serde(default)]
    pub self_report: bool,
    #[serde(default = "default_endpoint")]
    pub endpoint: EndpointConfig,
    #[serde(default)]
    pub prompts: PromptPaths,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PromptPaths {
    pub label: Option<PathBuf>,
    pub quant: Option<PathBuf>,
    pub qual: Option<PathBuf>,
}

fn default_seed() -> u64 {
    42
}

fn default_floor() -> f64 {
    uq_core::DEFAULT_FLOOR_LOGPROB
}

fn default_endpoint() -> EndpointConfig {
    EndpointConfig {
        base_url: "http://localhost:8000/v1".into(),
        api_key_env: None,
        top_k: 5,
        temperature: 0.0,
        timeout_secs: 30,
        max_retries: 3,
        backoff_base_ms: 250,
        concurrency: 4,
        mode: Mode::Live,
        cache_path: None,
    }
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            seed: default_seed(),
            floor_logprob: default_floor(),
            models: Vec::new(),
            self_report: false,
            endpoint: default_endpoint(),
            prompts: PromptPaths::default(),
        }
    }
}

impl AppConfig {
    /// Loads the file (when given), then applies `UQTRIAGE_*` environment
    /// overrides. Flag overrides are applied by the CLI afterwards.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            None => AppConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError::Io { path: p.display().to_string(), source: e })?;
                toml::from_str(&text).map_err(|e| ConfigError::Parse {
                    path: p.display().to_string(),
                    detail: e.to_string(),
                })?
            }
        };
        config.apply_env()?;
        Ok(config)
    }

    fn apply_env(&mut self) -> Result<(), ConfigError> {
        if let Ok(mode) = std::env::var("UQTRIAGE_MODE") {
            self.endpoint.mode = mode
                .parse()
                .map_err(|e| ConfigError::Env { var: "UQTRIAGE_MODE".into(), detail: e })?;
        }
        if let Ok(seed) = std::env::var("UQTRIAGE_SEED") {
            self.seed = seed.parse().map_err(|e| ConfigError::Env {
                var: "UQTRIAGE_SEED".into(),
                detail: format!("{e}"),
            })?;
        }
        if let Ok(url) = std::env::var("UQTRIAGE_BASE_URL") {
            self.endpoint.base_url = url;
        }
        Ok(())
    }

    /// Resolves prompt templates, reading overrides from disk and falling
    /// back to the built-in defaults.
    pub fn templates(&self) -> Result<PromptTemplates, ConfigError> {
        let mut templates = PromptTemplates::default();
        let read = |path: &Option<PathBuf>, slot: &mut String| -> Result<(), ConfigError> {
            if let Some(p) = path {
                *slot = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError::Io { path: p.display().to_string(), source: e })?;
            }
            Ok(())
        };
        read(&self.prompts.label, &mut templates.label)?;
        read(&self.prompts.quant, &mut templates.quant)?;
        read(&self.prompts.qual, &mut templates.qual)?;
        Ok(templates)
    }
}
