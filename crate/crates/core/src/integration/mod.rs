//! Package metadata and build-file integration.

pub mod cmake;
pub mod inject;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::focal_hash;
use crate::error::{Error, Result};
use crate::source::{module_of, relative_path};

pub use cmake::{parse_cmake, CmakeInfo, TestMacroStyle};
pub use inject::{inject_tests, remove_injection};

/// Directory (relative to the package root) receiving generated test files.
pub const GENERATED_TEST_DIR: &str = "test/awtest";
pub const BACKUP_SUFFIX: &str = ".awtest.bak";

#[derive(Debug, Error)]
pub enum CmakeError {
    #[error("CMake syntax error on line {line}: {message}")]
    Syntax { line: u32, message: String },
    #[error("corrupt generated block: {0}")]
    CorruptBlock(String),
    #[error("duplicate test target `{0}`")]
    DuplicateTarget(String),
    #[error("invalid package manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct PackageManifest {
    pub name: String,
    /// Workspace-relative package directory.
    pub root: String,
    pub module: String,
    pub internal_deps: Vec<String>,
    pub external_deps: Vec<String>,
    pub test_macro_style: TestMacroStyle,
    pub has_official_tests: bool,
    pub library_targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct TestRegistration {
    pub target_name: String,
    /// Path relative to the package root.
    pub test_file: String,
    pub linked_deps: Vec<String>,
}

/// Target name for the test of a focal function.
pub fn target_name(qualified_name: &str) -> String {
    format!("awtest_{}", focal_hash(qualified_name))
}

/// Dependencies declared in a `package.xml`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PackageXml {
    pub name: String,
    pub deps: Vec<String>,
    pub buildtool_deps: Vec<String>,
}

const XML_DEP_TAGS: &[&str] = &[
    "depend",
    "build_depend",
    "build_export_depend",
    "exec_depend",
    "run_depend",
];

/// Read name and library dependencies from a `package.xml`. Test, doc and
/// buildtool dependencies are not library dependencies and are left out of
/// `deps`.
pub fn parse_package_xml(text: &str, path: &Path) -> Result<PackageXml, CmakeError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| CmakeError::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    let mut out = PackageXml::default();
    for child in root.children().filter(|n| n.is_element()) {
        let value = child.text().unwrap_or("").trim().to_string();
        let tag = child.tag_name().name();
        if tag == "name" {
            out.name = value;
        } else if tag == "buildtool_depend" {
            out.buildtool_deps.push(value);
        } else if XML_DEP_TAGS.contains(&tag) && !value.is_empty() && !out.deps.contains(&value) {
            out.deps.push(value);
        }
    }
    if out.name.is_empty() {
        return Err(CmakeError::Manifest {
            path: path.to_path_buf(),
            message: "missing <name>".into(),
        });
    }
    Ok(out)
}

/// Partition dependency names by membership in the workspace. Order is kept.
pub fn split_deps(deps: &[String], workspace: &BTreeSet<String>) -> (Vec<String>, Vec<String>) {
    deps.iter().cloned().partition(|d| workspace.contains(d))
}

/// Package directories (those holding a `package.xml`) below `root`, sorted.
pub fn find_package_dirs(root: &Path) -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = walkdir::WalkDir::new(root)
        .into_iter()
        .filter_entry(|e| {
            if e.depth() == 0 || !e.file_type().is_dir() {
                return true;
            }
            let name = e.file_name().to_string_lossy();
            !(name.starts_with('.') || matches!(name.as_ref(), "build" | "install" | "log"))
        })
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file() && e.file_name() == "package.xml")
        .filter_map(|e| e.path().parent().map(Path::to_path_buf))
        .collect();
    dirs.sort();
    dirs
}

/// Discover and describe every package of a workspace.
pub fn discover_packages(root: &Path) -> Result<Vec<PackageManifest>> {
    struct Raw {
        xml: PackageXml,
        cmake: CmakeInfo,
        dir: PathBuf,
    }
    let mut raws = Vec::new();
    for dir in find_package_dirs(root) {
        let xml_path = dir.join("package.xml");
        let text = fs::read_to_string(&xml_path).map_err(|e| Error::io(&xml_path, e))?;
        let xml = parse_package_xml(&text, &xml_path)?;
        let cmake_path = dir.join("CMakeLists.txt");
        let cmake = if cmake_path.exists() {
            let text = fs::read_to_string(&cmake_path).map_err(|e| Error::io(&cmake_path, e))?;
            parse_cmake(&remove_injection(&text)?)?
        } else {
            parse_cmake("")?
        };
        raws.push(Raw { xml, cmake, dir });
    }
    let names: BTreeSet<String> = raws.iter().map(|r| r.xml.name.clone()).collect();
    let mut out = Vec::new();
    for r in raws {
        let mut deps: Vec<String> = Vec::new();
        for d in r.cmake.deps.iter().chain(r.xml.deps.iter()) {
            if d != &r.xml.name && !r.xml.buildtool_deps.contains(d) && !deps.contains(d) {
                deps.push(d.clone());
            }
        }
        deps.sort();
        let (internal, external) = split_deps(&deps, &names);
        let rel = relative_path(root, &r.dir);
        let has_tests = r.cmake.registers_tests && has_test_sources(&r.dir);
        out.push(PackageManifest {
            name: r.xml.name,
            module: module_of(&format!("{rel}/")),
            root: rel,
            internal_deps: internal,
            external_deps: external,
            test_macro_style: r.cmake.test_macro_style,
            has_official_tests: has_tests,
            library_targets: r.cmake.library_targets,
        });
    }
    Ok(out)
}

fn has_test_sources(pkg: &Path) -> bool {
    ["test", "tests"].iter().any(|d| {
        walkdir::WalkDir::new(pkg.join(d))
            .into_iter()
            .filter_map(|e| e.ok())
            .any(|e| {
                e.file_type().is_file()
                    && !e.path().components().any(|c| c.as_os_str() == "awtest")
                    && e.path().extension().is_some_and(|x| x == "cpp" || x == "cc")
            })
    })
}

/// Rewrite a package's CMakeLists with the given registrations, keeping a
/// one-time backup of the original.
pub fn inject_package(package_dir: &Path, registrations: &[TestRegistration]) -> Result<()> {
    for r in registrations {
        let p = package_dir.join(&r.test_file);
        if !p.is_file() {
            return Err(Error::Invariant(format!("test file {} does not exist", p.display())));
        }
    }
    let path = package_dir.join("CMakeLists.txt");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let new = inject_tests(&text, registrations)?;
    let backup = package_dir.join(format!("CMakeLists.txt{BACKUP_SUFFIX}"));
    if !backup.exists() && !registrations.is_empty() {
        let original = remove_injection(&text)?;
        fs::write(&backup, original).map_err(|e| Error::io(&backup, e))?;
    }
    if new != text {
        fs::write(&path, new).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Remove the generated block from a package's CMakeLists, if any.
pub fn remove_package_injection(package_dir: &Path) -> Result<bool> {
    let path = package_dir.join("CMakeLists.txt");
    if !path.exists() {
        return Ok(false);
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let new = remove_injection(&text)?;
    let changed = new != text;
    if changed {
        fs::write(&path, new).map_err(|e| Error::io(&path, e))?;
    }
    let backup = package_dir.join(format!("CMakeLists.txt{BACKUP_SUFFIX}"));
    if backup.exists() {
        fs::remove_file(&backup).map_err(|e| Error::io(&backup, e))?;
    }
    Ok(changed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_partitions_by_workspace() {
        let ws: BTreeSet<String> = ["pkg_a", "pkg_b"].iter().map(|s| s.to_string()).collect();
        let (i, e) = split_deps(&["pkg_a".into(), "rclcpp".into()], &ws);
        assert_eq!(i, vec!["pkg_a"]);
        assert_eq!(e, vec!["rclcpp"]);
        assert_eq!(split_deps(&[], &ws), (vec![], vec![]));
    }

    #[test]
    fn package_xml_dependencies() {
        let xml = r#"<?xml version="1.0"?>
<package format="3">
  <name>demo</name>
  <buildtool_depend>ament_cmake_auto</buildtool_depend>
  <depend>rclcpp</depend>
  <build_depend>eigen</build_depend>
  <exec_depend>rclcpp</exec_depend>
  <test_depend>ament_lint_auto</test_depend>
</package>"#;
        let p = parse_package_xml(xml, Path::new("package.xml")).unwrap();
        assert_eq!(p.name, "demo");
        assert_eq!(p.deps, vec!["rclcpp", "eigen"]);
        assert_eq!(p.buildtool_deps, vec!["ament_cmake_auto"]);
    }

    #[test]
    fn malformed_package_xml() {
        assert!(parse_package_xml("<package>", Path::new("x")).is_err());
        assert!(parse_package_xml("<package></package>", Path::new("x")).is_err());
    }

    #[test]
    fn target_names_are_stable() {
        assert_eq!(target_name("a::f(int)"), target_name("a::f(int)"));
        assert!(target_name("a::f(int)").starts_with("awtest_"));
        assert_eq!(target_name("a::f(int)").len(), "awtest_".len() + 12);
    }
}
