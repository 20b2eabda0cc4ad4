//! Optional TOML defaults. Keys use the long flag names; a flag given on
//! the command line always wins over the file.

use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub kb: Option<PathBuf>,
    pub goal: Option<PathBuf>,
    pub strategy: Option<String>,
    pub depth: Option<usize>,
    pub tolerance: Option<f64>,
    pub k: Option<usize>,
    pub embedding: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub tables: Option<Vec<PathBuf>>,
    pub prefixes: Option<Vec<String>>,
    pub suffixes: Option<Vec<String>>,
    pub cache_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub problems: Option<PathBuf>,
    pub prover: Option<String>,
    pub timeout: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub runs: Option<PathBuf>,
    pub tasks: Option<PathBuf>,
    pub params: Option<Vec<usize>>,
    pub proof_pattern: Option<String>,
    pub model_pattern: Option<String>,
    pub timeout_pattern: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

/// Flag value if given, otherwise the config value.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

/// Repeated flag values if any were given, otherwise the config list.
pub fn pick_list<T: Clone>(flag: &[T], file: &Option<Vec<T>>) -> Option<Vec<T>> {
    if flag.is_empty() {
        file.clone()
    } else {
        Some(flag.to_vec())
    }
}
