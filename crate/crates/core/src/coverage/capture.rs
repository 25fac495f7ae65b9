//! Turn gcov notes/data files into [`FileCoverage`] records.
//!
//! Uses `gcov --json-format --stdout`, which prints one JSON document per
//! note file. Sources outside `source_root` (system headers, gtest) are
//! dropped, and a header included from several translation units is merged
//! into a single record.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Deserialize;

use super::lcov::{merge_by_path, FileCoverage};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct GcovDoc {
    #[serde(default)]
    current_working_directory: String,
    #[serde(default)]
    files: Vec<GcovFile>,
}

#[derive(Deserialize)]
struct GcovFile {
    file: String,
    #[serde(default)]
    functions: Vec<GcovFunction>,
    #[serde(default)]
    lines: Vec<GcovLine>,
}

#[derive(Deserialize)]
struct GcovFunction {
    demangled_name: String,
    start_line: u32,
    execution_count: u64,
}

#[derive(Deserialize)]
struct GcovLine {
    line_number: u32,
    count: u64,
}

/// Note files below `dir`, skipping CMake's compiler probes.
pub fn find_gcno(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = walkdir::WalkDir::new(dir)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| p.extension().is_some_and(|x| x == "gcno"))
        .filter(|p| {
            !p.components()
                .any(|c| c.as_os_str().to_string_lossy().starts_with("CompilerId"))
        })
        .collect();
    out.sort();
    out
}

/// Convert gcov JSON output (one document per line) into coverage records
/// for sources under `source_root`. Paths in the result are absolute.
pub fn from_gcov_json(text: &str, source_root: &Path) -> Result<Vec<FileCoverage>> {
    let mut files = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: GcovDoc =
            serde_json::from_str(line).map_err(|e| Error::Invariant(format!("gcov JSON document {}: {e}", i + 1)))?;
        for f in doc.files {
            let mut path = PathBuf::from(&f.file);
            if path.is_relative() {
                path = Path::new(&doc.current_working_directory).join(path);
            }
            let path = normalize_path(&path);
            if !path.starts_with(source_root) {
                continue;
            }
            let mut fc = FileCoverage::new(path.to_string_lossy());
            // Template instances repeat a line once per instance.
            let mut lines: BTreeMap<u32, u64> = BTreeMap::new();
            for l in &f.lines {
                *lines.entry(l.line_number).or_default() += l.count;
            }
            fc.line_hits = lines;
            for func in &f.functions {
                *fc.function_hits.entry(func.demangled_name.clone()).or_default() += func.execution_count;
                fc.function_lines
                    .entry(func.demangled_name.clone())
                    .or_insert(func.start_line);
            }
            fc.recount();
            files.push(fc);
        }
    }
    Ok(merge_by_path(files))
}

/// Lexically resolve `.` and `..` so prefixes compare reliably.
fn normalize_path(p: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in p.components() {
        match c {
            std::path::Component::CurDir => {}
            std::path::Component::ParentDir => {
                out.pop();
            }
            other => out.push(other),
        }
    }
    out
}

/// Run gcov over every note file below `build_dir`.
pub fn capture(build_dir: &Path, source_root: &Path) -> Result<Vec<FileCoverage>> {
    let notes = find_gcno(build_dir);
    if notes.is_empty() {
        return Ok(Vec::new());
    }
    let root = source_root.canonicalize().map_err(|e| Error::io(source_root, e))?;
    let output = Command::new("gcov")
        .arg("--json-format")
        .arg("--stdout")
        .args(&notes)
        .current_dir(build_dir)
        .output()
        .map_err(|e| Error::io(Path::new("gcov"), e))?;
    if !output.status.success() {
        return Err(Error::Invariant(format!(
            "gcov failed: {}",
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    from_gcov_json(&String::from_utf8_lossy(&output.stdout), &root)
}

/// Rewrite absolute source paths to paths relative to `root`.
pub fn relativize(files: &mut [FileCoverage], root: &Path) {
    let root = root.canonicalize().unwrap_or_else(|_| root.to_path_buf());
    for f in files {
        if let Ok(rel) = Path::new(&f.source_path).strip_prefix(&root) {
            f.source_path = rel.to_string_lossy().replace('\\', "/");
        }
    }
}
