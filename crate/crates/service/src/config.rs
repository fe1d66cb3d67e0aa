use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fundscape::layout::LandscapeConfig;
use fundscape::metrics::MetricsConfig;

use crate::error::ServiceError;

pub const ENV_PREFIX: &str = "FUNDSCAPE_";

/// Service settings, read from a TOML file and then overridden by
/// `FUNDSCAPE_HOST`, `FUNDSCAPE_PORT`, `FUNDSCAPE_SNAPSHOT`,
/// `FUNDSCAPE_REGISTRY` and `FUNDSCAPE_STATIC_DIR`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    pub snapshot: PathBuf,
    /// Model registry; prediction endpoints answer 503 without one.
    pub registry: Option<PathBuf>,
    /// Built explorer assets served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Landscape payloads kept in memory.
    pub cache_capacity: usize,
    pub layout_seed: u64,
    pub default_threshold: f64,
    pub metrics: MetricsConfig,
    pub landscape: LandscapeConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            snapshot: PathBuf::from("snapshot.json"),
            registry: None,
            static_dir: None,
            cache_capacity: 32,
            layout_seed: 0,
            default_threshold: 0.5,
            metrics: MetricsConfig::default(),
            landscape: LandscapeConfig::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ServiceError> {
        toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))
    }

    /// Defaults, then `path` if given, then the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ServiceError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ServiceError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::from_toml(&text)?
            }
            None => ServiceConfig::default(),
        };
        config.apply_env(|key| std::env::var(key).ok())?;
        Ok(config)
    }

    /// Applies overrides looked up by full variable name.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ServiceError> {
        let var = |name: &str| lookup(&format!("{ENV_PREFIX}{name}")).filter(|v| !v.is_empty());
        if let Some(v) = var("HOST") {
            self.host = v;
        }
        if let Some(v) = var("PORT") {
            self.port = v
                .parse()
                .map_err(|_| ServiceError::Config(format!("{ENV_PREFIX}PORT must be a port number, got `{v}`")))?;
        }
        if let Some(v) = var("SNAPSHOT") {
            self.snapshot = v.into();
        }
        if let Some(v) = var("REGISTRY") {
            self.registry = Some(v.into());
        }
        if let Some(v) = var("STATIC_DIR") {
            self.static_dir = Some(v.into());
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        if self.cache_capacity == 0 {
            return Err(ServiceError::Config("cache_capacity must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.default_threshold) {
            return Err(ServiceError::Config(format!(
                "default_threshold must lie in [0, 1], got {}",
                self.default_threshold
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    #[test]
    fn toml_then_env() {
        let mut config = ServiceConfig::from_toml(
            r#"
            port = 9000
            snapshot = "data/snap.json"
            [landscape.force]
            d_max = 300.0
            "#,
        )
        .unwrap();
        assert_eq!(config.port, 9000);
        assert_eq!(config.landscape.force.d_max, 300.0);
        let env: HashMap<&str, &str> = HashMap::from([("FUNDSCAPE_PORT", "9100"), ("FUNDSCAPE_REGISTRY", "models")]);
        config.apply_env(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(config.port, 9100);
        assert_eq!(config.snapshot, PathBuf::from("data/snap.json"));
        assert_eq!(config.registry, Some(PathBuf::from("models")));
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(ServiceConfig::from_toml("prot = 1").is_err());
        assert!(ServiceConfig::from_toml("[landscape.force]\nd_mx = 300.0").is_err());
        assert!(ServiceConfig::from_toml("[metrics.hit]\nthreshhold = 0.1").is_err());
        let mut config = ServiceConfig::default();
        assert!(config.apply_env(|k| (k == "FUNDSCAPE_PORT").then(|| "http".to_string())).is_err());
    }
}
