//! Service configuration: a TOML file whose sections all have defaults,
//! overridden by `CONTEXTKG_*` environment variables and CLI flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use contextkg_core::config::EngineConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration in {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("invalid value {value:?} for {name}")]
    Env { name: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    /// Session snapshots are written under `<data_dir>/sessions`.
    pub data_dir: PathBuf,
    /// Extra graph documents addressable by file stem.
    pub graph_dir: Option<PathBuf>,
    /// Route every model call to the deterministic offline paths.
    pub offline: bool,
    /// Longer query jobs answer 202 with a poll URL.
    pub job_timeout_secs: f64,
    pub max_graph_bytes: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("data"),
            graph_dir: None,
            offline: false,
            job_timeout_secs: 60.0,
            max_graph_bytes: 32 * 1024 * 1024,
        }
    }
}

impl ServerConfig {
    pub fn job_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.job_timeout_secs.max(0.0))
    }
}

/// OpenAI-style chat-completion endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    /// Base URL, e.g. `https://api.example.com/v1`. Empty disables the model.
    pub endpoint: String,
    pub model: String,
    /// Usually supplied through `CONTEXTKG_LLM_API_KEY` instead.
    pub api_key: Option<String>,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub embedding_model: String,
    pub embedding_dimension: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: String::new(),
            model: "gpt-4-turbo".into(),
            api_key: None,
            timeout_secs: 30.0,
            max_retries: 2,
            embedding_model: "text-embedding-3-small".into(),
            embedding_dimension: 1536,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub server: ServerConfig,
    pub llm: LlmConfig,
    pub engine: EngineConfig,
}

fn env_var(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|v| !v.trim().is_empty())
}

fn parse_bool(name: &'static str, value: String) -> Result<bool, ConfigError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::Env { name, value }),
    }
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Applies `CONTEXTKG_OFFLINE`, `CONTEXTKG_PORT`, `CONTEXTKG_DATA_DIR`,
    /// `CONTEXTKG_LLM_ENDPOINT`, `CONTEXTKG_LLM_MODEL` and
    /// `CONTEXTKG_LLM_API_KEY`.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        if let Some(v) = env_var("CONTEXTKG_OFFLINE") {
            self.server.offline = parse_bool("CONTEXTKG_OFFLINE", v)?;
        }
        if let Some(v) = env_var("CONTEXTKG_PORT") {
            self.server.port = v.trim().parse().map_err(|_| ConfigError::Env {
                name: "CONTEXTKG_PORT",
                value: v,
            })?;
        }
        if let Some(v) = env_var("CONTEXTKG_DATA_DIR") {
            self.server.data_dir = PathBuf::from(v);
        }
        if let Some(v) = env_var("CONTEXTKG_LLM_ENDPOINT") {
            self.llm.endpoint = v;
        }
        if let Some(v) = env_var("CONTEXTKG_LLM_MODEL") {
            self.llm.model = v;
        }
        if let Some(v) = env_var("CONTEXTKG_LLM_API_KEY") {
            self.llm.api_key = Some(v);
        }
        Ok(())
    }

    /// Whether model-backed paths are used at all.
    pub fn live(&self) -> bool {
        !self.server.offline && !self.llm.endpoint.trim().is_empty()
    }
}
