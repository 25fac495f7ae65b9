//! Coverage ingestion, official-test metrics and uncovered-code findings.

pub mod capture;
pub mod lcov;
pub mod matching;
pub mod metrics;
pub mod uncovered;

pub use lcov::{parse_lcov, write_lcov, FileCoverage, LcovError};
pub use matching::{match_functions, match_key, FunctionMatch};
pub use metrics::{
    compute_all, compute_module_metrics, executed_packages, render_table1, CoverageMetrics, WorkspaceModel,
};
pub use uncovered::{categorize_uncovered, UncoveredCategory, UncoveredFinding};
