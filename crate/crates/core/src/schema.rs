//! JSON Schemas of the state files other tools may consume.

use schemars::schema::RootSchema;
use schemars::schema_for;

use crate::callgraph::CallGraph;
use crate::coverage::metrics::WorkspaceModel;
use crate::report::GenerationMetrics;
use crate::Benchmark;

/// State file name and the schema its contents follow.
pub fn state_schemas() -> Vec<(&'static str, RootSchema)> {
    vec![
        ("symbols.json", schema_for!(WorkspaceModel)),
        ("callgraph.json", schema_for!(Vec<CallGraph>)),
        ("benchmark.json", schema_for!(Benchmark)),
        ("metrics.json", schema_for!(Vec<GenerationMetrics>)),
    ]
}
