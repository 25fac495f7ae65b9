//! The committed compiler and test-runner logs against their hand labels.

use std::path::{Path, PathBuf};

use awtest_core::coverage::WorkspaceModel;
use awtest_core::harness::{
    classify_build_error, classify_runtime_error, BuildErrorDetail, ClassifyContext, RuntimeClass,
};
use serde::Deserialize;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[derive(Deserialize)]
struct BuildLabel {
    log: String,
    details: Vec<BuildErrorDetail>,
}

#[derive(Deserialize)]
struct RuntimeLabel {
    log: String,
    timed_out: bool,
    class: RuntimeClass,
}

fn read<T: for<'de> Deserialize<'de>>(p: PathBuf) -> T {
    serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap()
}

#[test]
fn build_logs_match_labels() {
    let corpus = fixtures().join("corpus/build");
    let labels: Vec<BuildLabel> = read(corpus.join("labels.json"));
    let model = WorkspaceModel::load(&fixtures().join("workspace")).unwrap();
    let ctx = ClassifyContext::from_units(&model.units);
    let mut seen = std::collections::BTreeSet::new();
    for l in &labels {
        let text = std::fs::read_to_string(corpus.join("logs").join(&l.log)).unwrap();
        let got: Vec<_> = classify_build_error(&text, &ctx)
            .into_iter()
            .map(|c| c.detail)
            .collect();
        assert_eq!(got, l.details, "{}", l.log);
        seen.extend(got);
    }
    assert!(labels.len() >= 15);
    assert_eq!(
        seen.len(),
        BuildErrorDetail::ALL.len(),
        "every detail label is exercised"
    );
}

#[test]
fn runtime_logs_match_labels() {
    let corpus = fixtures().join("corpus/runtime");
    let labels: Vec<RuntimeLabel> = read(corpus.join("labels.json"));
    let mut seen = std::collections::BTreeSet::new();
    for l in &labels {
        let text = std::fs::read_to_string(corpus.join("logs").join(&l.log)).unwrap();
        let got = classify_runtime_error(&text, l.timed_out);
        assert_eq!(got, l.class, "{}", l.log);
        seen.insert(got);
    }
    assert!(labels.len() >= 6);
    assert_eq!(seen.len(), RuntimeClass::ALL.len());
}

#[test]
fn every_labelled_log_is_committed() {
    for dir in ["build", "runtime"] {
        let corpus = fixtures().join("corpus").join(dir);
        let labels: Vec<serde_json::Value> = read(corpus.join("labels.json"));
        let n = std::fs::read_dir(corpus.join("logs")).unwrap().count();
        assert_eq!(labels.len(), n, "{dir}: unlabelled or missing logs");
    }
}
