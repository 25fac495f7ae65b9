//! Inputs shared by the benchmarks: the fixture workspace and corpora.

use std::fs;
use std::path::{Path, PathBuf};

use awtest_core::coverage::metrics::WorkspaceModel;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Every `.cpp`/`.hpp` file of the fixture workspace as (relative path, text).
pub fn fixture_sources() -> Vec<(String, String)> {
    let model = fixture_model();
    model
        .units
        .iter()
        .map(|u| {
            let text = fs::read_to_string(fixtures().join("workspace").join(&u.path)).expect("fixture source");
            (u.path.clone(), text)
        })
        .collect()
}

pub fn fixture_model() -> WorkspaceModel {
    WorkspaceModel::load(&fixtures().join("workspace")).expect("fixture workspace")
}

/// Build logs of the classifier corpus.
pub fn build_logs() -> Vec<String> {
    let mut logs: Vec<_> = fs::read_dir(fixtures().join("corpus/build/logs"))
        .expect("corpus")
        .map(|e| e.expect("entry").path())
        .collect();
    logs.sort();
    logs.iter().map(|p| fs::read_to_string(p).expect("log")).collect()
}
