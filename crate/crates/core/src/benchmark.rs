//! Evaluation datasets: branched functions with parameters, split by whether
//! the official tests executed them.

use std::collections::BTreeSet;
use std::path::Path;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::coverage::metrics::{match_workspace, WorkspaceModel};
use crate::coverage::FileCoverage;
use crate::digest::FieldHasher;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct BenchmarkEntry {
    pub focal: String,
    pub package: String,
    pub file: String,
    pub line: u32,
    pub covered_by_official: bool,
    pub branch_count: u32,
    pub param_count: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Benchmark {
    pub covered: Vec<BenchmarkEntry>,
    pub uncovered: Vec<BenchmarkEntry>,
    pub workspace_digest: String,
}

impl Benchmark {
    pub fn entries(&self) -> impl Iterator<Item = &BenchmarkEntry> {
        self.covered.iter().chain(self.uncovered.iter())
    }

    pub fn len(&self) -> usize {
        self.covered.len() + self.uncovered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn packages(&self) -> BTreeSet<String> {
        self.entries().map(|e| e.package.clone()).collect()
    }
}

/// Hash of `(path, bytes)` pairs in path order.
pub fn digest_sources(sources: &[(String, Vec<u8>)]) -> String {
    let mut sorted: Vec<&(String, Vec<u8>)> = sources.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut h = FieldHasher::new();
    for (path, bytes) in sorted {
        h.field(path.as_bytes()).field(bytes);
    }
    h.finish()
}

/// Digest of every analysed unit, read from below `root`.
pub fn workspace_digest(root: &Path, model: &WorkspaceModel) -> Result<String> {
    let mut sources = Vec::new();
    for u in &model.units {
        let p = root.join(&u.path);
        let bytes = std::fs::read(&p).map_err(|e| Error::io(&p, e))?;
        sources.push((u.path.clone(), bytes));
    }
    Ok(digest_sources(&sources))
}

/// Select definitions with at least one branch and one explicit parameter
/// from packages that have official tests, ordered by package, file, line.
pub fn build_benchmark(
    model: &WorkspaceModel,
    coverage: &[FileCoverage],
    official: &BTreeSet<String>,
    workspace_digest: String,
) -> Benchmark {
    let matches = match_workspace(model, coverage);
    let mut entries = Vec::new();
    for u in model.units.iter().filter(|u| official.contains(&u.package_name)) {
        let m = &matches[&u.path];
        for f in u.definitions() {
            if f.branch_count == 0 || f.param_count() == 0 {
                continue;
            }
            entries.push(BenchmarkEntry {
                focal: f.qualified_name.clone(),
                package: u.package_name.clone(),
                file: u.path.clone(),
                line: f.line_span.start,
                covered_by_official: m.is_covered(&f.qualified_name),
                branch_count: f.branch_count,
                param_count: f.param_count() as u32,
            });
        }
    }
    entries.sort_by(|a, b| (&a.package, &a.file, a.line).cmp(&(&b.package, &b.file, b.line)));
    let mut seen = BTreeSet::new();
    entries.retain(|e| seen.insert(e.focal.clone()));
    let (covered, uncovered) = entries.into_iter().partition(|e| e.covered_by_official);
    Benchmark {
        covered,
        uncovered,
        workspace_digest,
    }
}

pub fn export_benchmark(b: &Benchmark, path: &Path) -> Result<()> {
    crate::fsutil::write_json(path, b)
}

pub fn import_benchmark(path: &Path) -> Result<Benchmark> {
    crate::fsutil::read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parse_unit;

    fn model(src: &str) -> WorkspaceModel {
        let mut u = parse_unit("src/m/p/a.cpp", src);
        u.package_name = "p".into();
        WorkspaceModel {
            packages: vec![],
            units: vec![u],
        }
    }

    #[test]
    fn filter_rules() {
        let m = model(
            "int noparams() { if (true) return 1; return 0; }\nint straight(int x) { return x; }\nint both(int x) { if (x) return 1; return 0; }\n",
        );
        let b = build_benchmark(&m, &[], &BTreeSet::from(["p".to_string()]), String::new());
        let names: Vec<&str> = b.entries().map(|e| e.focal.as_str()).collect();
        assert_eq!(names, vec!["both(int)"]);
        assert!(!b.uncovered[0].covered_by_official);
    }

    #[test]
    fn packages_without_official_tests_are_skipped() {
        let m = model("int both(int x) { if (x) return 1; return 0; }\n");
        assert!(build_benchmark(&m, &[], &BTreeSet::new(), String::new()).is_empty());
    }

    #[test]
    fn digest_tracks_bytes() {
        let a = digest_sources(&[("a".into(), b"x".to_vec())]);
        assert_ne!(a, digest_sources(&[("a".into(), b"y".to_vec())]));
        assert_eq!(
            digest_sources(&[("a".into(), b"1".to_vec()), ("b".into(), b"2".to_vec())]),
            digest_sources(&[("b".into(), b"2".to_vec()), ("a".into(), b"1".to_vec())])
        );
    }

    #[test]
    fn empty_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("benchmark.json");
        export_benchmark(&Benchmark::default(), &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"covered\": []"));
        assert_eq!(import_benchmark(&p).unwrap(), Benchmark::default());
    }
}
