use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

pub const ENV_LISTEN: &str = "POLICYMODEL_LISTEN";
pub const ENV_STORAGE: &str = "POLICYMODEL_STORAGE";
pub const ENV_ADMIN_TOKEN: &str = "POLICYMODEL_ADMIN_TOKEN";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    #[default]
    Public,
    Private,
}

/// A model directory served from startup.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostedModel {
    pub path: PathBuf,
    #[serde(default)]
    pub visibility: Visibility,
    /// Access key for a private version; generated when absent.
    pub key: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_listen")]
    pub listen: String,
    pub storage: PathBuf,
    /// Admin endpoints are disabled without a token.
    pub admin_token: Option<String>,
    #[serde(default)]
    pub models: Vec<HostedModel>,
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

impl Config {
    /// Parses TOML. Relative model and storage paths are taken relative to
    /// `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Config, toml::de::Error> {
        let mut c: Config = toml::from_str(text)?;
        c.storage = base.join(&c.storage);
        for m in &mut c.models {
            m.path = base.join(&m.path);
        }
        Ok(c)
    }

    /// Reads a config file, then applies environment overrides through `env`.
    pub fn load(path: &Path, env: impl Fn(&str) -> Option<String>) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut c = Config::parse(&text, base).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        c.apply_env(env);
        Ok(c)
    }

    pub fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) {
        if let Some(v) = env(ENV_LISTEN) {
            self.listen = v;
        }
        if let Some(v) = env(ENV_STORAGE) {
            self.storage = v.into();
        }
        if let Some(v) = env(ENV_ADMIN_TOKEN) {
            self.admin_token = Some(v);
        }
    }
}
