//! Toolkit for generating, injecting, building, running and scoring
//! LLM-written GoogleTest unit tests for C++ package workspaces.
//!
//! The crate is organised along the pipeline:
//!
//! * [`source`] parses C++ translation units into per-function records.
//! * [`callgraph`] relates callers to callees inside one package.
//! * [`integration`] reads package build files and injects generated tests.
//! * [`coverage`] ingests lcov tracefiles and computes coverage metrics.
//! * [`benchmark`] selects branched, parameterised focal functions.
//! * [`prompt`] renders generation and documentation prompts.
//! * [`llm`] talks to chat-completion backends (live, record, replay).
//! * [`harness`] builds and runs tests and classifies failures.
//! * [`report`] turns outcomes into metric tables.
//! * [`pipeline`] wires the stages together over an `.awtest/` state directory.
//! * [`schema`] describes the JSON state files.

pub mod benchmark;
pub mod callgraph;
pub mod coverage;
pub mod digest;
pub mod error;
pub mod fsutil;
pub mod harness;
pub mod integration;
pub mod llm;
pub mod percent;
pub mod pipeline;
pub mod prompt;
pub mod report;
pub mod schema;
pub mod source;

pub use benchmark::{Benchmark, BenchmarkEntry};
pub use callgraph::{CallGraph, CallerExample};
pub use coverage::{CoverageMetrics, FileCoverage, UncoveredFinding};
pub use error::{Error, Result};
pub use harness::{BuildErrorClass, BuildOutcome, TestRunOutcome};
pub use integration::{PackageManifest, TestRegistration};
pub use llm::{ChatRequest, ChatResponse};
pub use prompt::{GeneratedDoc, PromptBundle};
pub use report::{GenerationMetrics, ReportTable};
pub use source::{ClassRecord, DocComment, FunctionRecord, SourceUnit};
