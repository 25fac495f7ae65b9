//! Build injected test targets, run them case by case and classify failures.

pub mod classify;
pub mod gtest;
pub mod process;
mod run;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classify::{
    classify_build_error, classify_runtime_error, BuildErrorCategory, BuildErrorClass, BuildErrorDetail,
    ClassifyContext, RuntimeClass,
};
pub use run::{build_targets, reset_coverage_counters, run_target, run_tests, HarnessConfig, TargetRun};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("build tool `{0}` not found on PATH")]
    ToolMissing(String),
    #[error("cannot run `{program}`: {message}")]
    Spawn { program: String, message: String },
    #[error("test binary for target `{target}` not found at {path}")]
    BinaryMissing { target: String, path: String },
    #[error("harness configuration: {0}")]
    Config(String),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildOutcome {
    pub package: String,
    pub target: String,
    pub built: bool,
    pub log_text: String,
    /// Empty when `built`.
    pub error_classes: Vec<BuildErrorClass>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestStatus {
    Passed,
    AssertionFailed,
    RuntimeException,
    Timeout,
}

impl TestStatus {
    fn from_class(class: RuntimeClass) -> Self {
        match class {
            RuntimeClass::AssertionError => TestStatus::AssertionFailed,
            RuntimeClass::Timeout => TestStatus::Timeout,
            _ => TestStatus::RuntimeException,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRunOutcome {
    pub target: String,
    pub case_name: String,
    pub status: TestStatus,
    /// Absent exactly when `status` is `Passed`.
    pub runtime_class: Option<RuntimeClass>,
    pub duration_ms: u64,
}

impl TestRunOutcome {
    pub fn passed(&self) -> bool {
        self.status == TestStatus::Passed
    }
}
