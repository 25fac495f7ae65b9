//! `awtest.json`: the per-workspace pipeline configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::HarnessConfig;
use crate::llm::{LiveConfig, DEFAULT_MAX_OUTPUT_TOKENS};
use crate::prompt::PromptMode;

pub const CONFIG_FILE: &str = "awtest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    /// Call the model, keep nothing.
    Live,
    /// Call the model and store every exchange as a transcript.
    Record,
    /// Answer from stored transcripts only.
    Replay,
    /// Answer from hand-written response files and store transcripts.
    Scripted,
}

impl FromStr for BackendChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "live" => Ok(Self::Live),
            "record" => Ok(Self::Record),
            "replay" => Ok(Self::Replay),
            "scripted" => Ok(Self::Scripted),
            other => Err(Error::Config(format!("unknown backend `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    Covered,
    Uncovered,
    All,
}

impl FromStr for Dataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "covered" => Ok(Self::Covered),
            "uncovered" => Ok(Self::Uncovered),
            "all" => Ok(Self::All),
            other => Err(Error::Config(format!("unknown dataset `{other}`"))),
        }
    }
}

/// Pipeline settings. API keys never live here: `live.api_key_env` names the
/// environment variable that holds one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub backend: BackendChoice,
    pub model: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub mode: PromptMode,
    pub dataset: Dataset,
    /// Usage examples per prompt.
    pub k: usize,
    /// Character budget shared by the usage examples of one prompt.
    pub budget: usize,
    /// Transcript directory, relative to the workspace root.
    pub transcripts: PathBuf,
    /// Response files for the scripted backend.
    pub script_dir: Option<PathBuf>,
    /// Tracefile of the official tests, used by `bench`.
    pub official_lcov: Option<PathBuf>,
    pub live: LiveConfig,
    pub harness: HarnessConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            backend: BackendChoice::Replay,
            model: "gpt-4o-mini".into(),
            temperature: 0.0,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            mode: PromptMode::Awtest,
            dataset: Dataset::Covered,
            k: 3,
            budget: 4000,
            transcripts: PathBuf::from(".awtest/transcripts"),
            script_dir: None,
            official_lcov: None,
            live: LiveConfig::default(),
            harness: HarnessConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Read `awtest.json` below `root`; defaults when the file is absent.
    pub fn load(root: &Path) -> Result<Self> {
        let path = root.join(CONFIG_FILE);
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == PromptMode::Docgen {
            return Err(Error::Config("mode must be `basic` or `awtest`".into()));
        }
        if self.harness.configure.is_empty() || self.harness.build.is_empty() {
            return Err(Error::Config("harness command templates must not be empty".into()));
        }
        if self.harness.test_timeout_s == 0 {
            return Err(Error::Config("test timeout must be positive".into()));
        }
        if self.backend == BackendChoice::Scripted && self.script_dir.is_none() {
            return Err(Error::Config("the scripted backend needs `script_dir`".into()));
        }
        Ok(())
    }

    /// Resolve a configured path against the workspace root.
    pub fn resolve(root: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            root.join(p)
        }
    }
}
