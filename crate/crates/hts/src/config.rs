//! Service configuration and data loading.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use crosswalk_core::concordance::{LoadError, LoadReport, Store, StoreBuilder};
use crosswalk_core::kos::{KosError, Registry};
use serde::Deserialize;
use thiserror::Error;

/// Environment variable naming a TOML configuration file.
pub const CONFIG_ENV: &str = "HTS_CONFIG";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Mappings { path: PathBuf, source: LoadError },
    #[error("{path}: {source}")]
    Registry { path: PathBuf, source: KosError },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_host")]
    pub host: String,
    #[serde(default = "default_port")]
    pub port: u16,
    /// Mapping TSV files.
    #[serde(default)]
    pub mappings: Vec<PathBuf>,
    /// Optional vocabulary registry TSV.
    #[serde(default)]
    pub vocabularies: Option<PathBuf>,
}

fn default_host() -> String {
    "127.0.0.1".to_string()
}

fn default_port() -> u16 {
    8080
}

impl Default for Config {
    fn default() -> Self {
        Config {
            host: default_host(),
            port: default_port(),
            mappings: Vec::new(),
            vocabularies: None,
        }
    }
}

impl Config {
    /// Parses a TOML file; relative data paths are taken relative to it.
    pub fn load(path: &Path) -> Result<Config, DataError> {
        let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: Config = toml::from_str(&text).map_err(|e| DataError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in config.mappings.iter_mut().chain(config.vocabularies.as_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn from_env() -> Result<Option<Config>, DataError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) => Config::load(Path::new(&path)).map(Some),
            None => Ok(None),
        }
    }

    pub fn load_store(&self) -> Result<(Store, LoadReport), DataError> {
        load_store(&self.mappings, self.vocabularies.as_deref())
    }
}

fn open(path: &Path) -> Result<BufReader<File>, DataError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Loads mapping files into one store. With a registry every vocabulary
/// must be registered.
pub fn load_store(mappings: &[PathBuf], vocabularies: Option<&Path>) -> Result<(Store, LoadReport), DataError> {
    let mut builder = match vocabularies {
        Some(path) => StoreBuilder::with_registry(Registry::from_tsv(open(path)?).map_err(|source| {
            DataError::Registry {
                path: path.to_path_buf(),
                source,
            }
        })?),
        None => StoreBuilder::new(),
    };
    for path in mappings {
        builder.load_tsv(open(path)?).map_err(|source| DataError::Mappings {
            path: path.clone(),
            source,
        })?;
    }
    let report = builder.report().clone();
    Ok((builder.freeze(), report))
}
