//! C++ source model: per-file units holding function and class records.
//!
//! Parsing is grammar-level (tree-sitter). Macros are not expanded and no
//! semantic analysis happens; names are canonicalised so they can be matched
//! against demangled names in coverage data.

mod branches;
mod doc;
pub mod names;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use branches::{count_branches, count_branches_in_source};
pub use doc::extract_doc;
pub use parse::{parse_unit, parse_unit_bytes};

/// Extensions treated as C++ sources or headers.
pub const CPP_EXTENSIONS: &[&str] = &["cpp", "cc", "cxx", "hpp", "hh", "hxx", "h"];

/// Directories under a package root that never hold analysed product code.
pub const EXCLUDED_DIRS: &[&str] = &["test", "tests", "build", "install", "log", ".awtest"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct SourceUnit {
    /// Workspace-relative path with `/` separators.
    pub path: String,
    pub package_name: String,
    pub includes: Vec<Include>,
    pub functions: Vec<FunctionRecord>,
    pub classes: Vec<ClassRecord>,
    pub parse_ok: bool,
    pub line_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Include {
    pub header: String,
    pub form: IncludeForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum IncludeForm {
    Angle,
    Quote,
}

impl Include {
    /// The directive as it would appear in source.
    pub fn directive(&self) -> String {
        match self.form {
            IncludeForm::Angle => format!("#include <{}>", self.header),
            IncludeForm::Quote => format!("#include \"{}\"", self.header),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Access {
    Public,
    Protected,
    Private,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    Function,
    Constructor,
    Destructor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, JsonSchema)]
pub struct LineSpan {
    pub start: u32,
    pub end: u32,
}

impl LineSpan {
    pub fn new(start: u32, end: u32) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, line: u32) -> bool {
        self.start <= line && line <= self.end
    }

    pub fn overlaps(&self, other: &LineSpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct Param {
    /// Empty for unnamed parameters.
    pub name: String,
    pub type_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum DocStyle {
    DoxygenBlock,
    LineTripleSlash,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct DocComment {
    pub raw_text: String,
    pub style: DocStyle,
}

/// A call expression found in a function body.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
pub struct CallSite {
    /// Callee as written, template arguments removed (`ns::f`, `f`).
    pub callee: String,
    pub line: u32,
    /// Called through `obj.f()` or `ptr->f()`.
    pub member: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    IfBody,
    CatchBody,
}

/// Lines of an if-consequence or catch handler body inside a definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct GuardedBlock {
    pub kind: BlockKind,
    pub span: LineSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct FunctionRecord {
    pub simple_name: String,
    /// `ns::Class::name(type, type)` with ` const` appended for const methods.
    pub qualified_name: String,
    pub namespace_path: Vec<String>,
    /// Enclosing class path, `Outer::Inner` for nested classes.
    pub class_name: Option<String>,
    pub access: Access,
    pub member_kind: MemberKind,
    pub signature_text: String,
    pub params: Vec<Param>,
    pub return_type: String,
    pub line_span: LineSpan,
    pub has_branches: bool,
    pub branch_count: u32,
    pub is_definition: bool,
    pub is_template: bool,
    pub doc: Option<DocComment>,
    pub body_text: String,
    pub calls: Vec<CallSite>,
    pub guarded_blocks: Vec<GuardedBlock>,
}

impl FunctionRecord {
    /// Qualified name without the parameter list.
    pub fn name_path(&self) -> String {
        let mut parts: Vec<&str> = self.namespace_path.iter().map(String::as_str).collect();
        if let Some(class) = &self.class_name {
            parts.push(class);
        }
        parts.push(&self.simple_name);
        parts.join("::")
    }

    /// Enclosing scope (`ns::Class`), empty at global scope.
    pub fn scope_path(&self) -> String {
        let mut parts: Vec<&str> = self.namespace_path.iter().map(String::as_str).collect();
        if let Some(class) = &self.class_name {
            parts.push(class);
        }
        parts.join("::")
    }

    /// Innermost named namespace, skipping anonymous ones.
    pub fn namespace(&self) -> Option<String> {
        let named: Vec<&str> = self
            .namespace_path
            .iter()
            .filter(|n| !n.starts_with('('))
            .map(String::as_str)
            .collect();
        if named.is_empty() {
            None
        } else {
            Some(named.join("::"))
        }
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Class,
    Struct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct MemberField {
    pub name: String,
    pub type_text: String,
    pub access: Access,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct ClassRecord {
    pub qualified_name: String,
    pub kind: ClassKind,
    pub public_methods: Vec<String>,
    pub constructors: Vec<String>,
    pub member_fields: Vec<MemberField>,
    pub line_span: LineSpan,
}

impl SourceUnit {
    pub fn function(&self, qualified_name: &str) -> Option<&FunctionRecord> {
        self.functions
            .iter()
            .find(|f| f.qualified_name == qualified_name && f.is_definition)
            .or_else(|| self.functions.iter().find(|f| f.qualified_name == qualified_name))
    }

    pub fn definitions(&self) -> impl Iterator<Item = &FunctionRecord> {
        self.functions.iter().filter(|f| f.is_definition)
    }

    /// Top-level grouping: the first path component under `src/`.
    pub fn module(&self) -> String {
        module_of(&self.path)
    }

    pub fn is_header(&self) -> bool {
        matches!(
            Path::new(&self.path).extension().and_then(|e| e.to_str()),
            Some("h" | "hh" | "hpp" | "hxx")
        )
    }
}

/// First path component below a `src/` directory, or the first component of
/// the path when there is none.
pub fn module_of(path: &str) -> String {
    let parts: Vec<&str> = path.split('/').filter(|p| !p.is_empty()).collect();
    match parts.iter().position(|p| *p == "src") {
        Some(i) if i + 1 < parts.len() => parts[i + 1].to_string(),
        _ => parts.first().map(|s| s.to_string()).unwrap_or_default(),
    }
}

/// Workspace-relative `/`-separated path.
pub fn relative_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Read and parse one file.
pub fn read_unit(workspace_root: &Path, path: &Path, package_name: &str) -> Result<SourceUnit> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let rel = relative_path(workspace_root, path);
    let mut unit = parse_unit_bytes(&rel, &bytes);
    unit.package_name = package_name.to_string();
    Ok(unit)
}

/// C++ files of a package, sorted, skipping test and build directories.
pub fn package_sources(package_root: &Path) -> Vec<std::path::PathBuf> {
    let mut files: Vec<_> = walkdir::WalkDir::new(package_root)
        .into_iter()
        .filter_entry(|e| {
            if e.depth() == 0 || !e.file_type().is_dir() {
                return true;
            }
            let name = e.file_name().to_string_lossy();
            !(EXCLUDED_DIRS.contains(&name.as_ref()) || name.starts_with('.'))
        })
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .filter(|e| {
            e.path()
                .extension()
                .and_then(|x| x.to_str())
                .map(|x| CPP_EXTENSIONS.contains(&x))
                .unwrap_or(false)
        })
        .map(|e| e.into_path())
        .collect();
    files.sort();
    files
}

/// Parse every source of one package and link declarations across its files.
pub fn analyze_package(workspace_root: &Path, package_root: &Path, package_name: &str) -> Result<Vec<SourceUnit>> {
    let files = package_sources(package_root);
    let mut units = files
        .par_iter()
        .map(|p| read_unit(workspace_root, p, package_name))
        .collect::<Result<Vec<_>>>()?;
    units.sort_by(|a, b| a.path.cmp(&b.path));
    link_package(&mut units);
    Ok(units)
}

/// Resolve out-of-line definitions against declarations elsewhere in the package.
///
/// A definition like `Foo::bar()` in a `.cpp` cannot tell on its own whether
/// `Foo` is a class or a namespace, nor what access `bar` has. When the class
/// is declared in another unit of the package the access is copied from the
/// in-class declaration. When no class `Foo` exists but a free function with
/// the same qualified name does, the record is turned into a free function.
/// Anything left unresolved keeps the public default.
pub fn link_package(units: &mut [SourceUnit]) {
    let classes: BTreeSet<String> = units
        .iter()
        .flat_map(|u| u.classes.iter().map(|c| c.qualified_name.clone()))
        .collect();
    let mut declared_access: BTreeMap<String, Access> = BTreeMap::new();
    let mut free_names: BTreeSet<String> = BTreeSet::new();
    for unit in units.iter() {
        let local: BTreeSet<&str> = unit.classes.iter().map(|c| c.qualified_name.as_str()).collect();
        for f in &unit.functions {
            if f.access == Access::Free {
                free_names.insert(f.qualified_name.clone());
            } else if local.contains(f.scope_path().as_str()) {
                declared_access.insert(f.qualified_name.clone(), f.access);
            }
        }
    }
    for unit in units.iter_mut() {
        for f in unit.functions.iter_mut() {
            let Some(class) = f.class_name.clone() else {
                continue;
            };
            if let Some(access) = declared_access.get(&f.qualified_name) {
                f.access = *access;
            } else if !classes.contains(&f.scope_path()) && free_names.contains(&f.qualified_name) {
                f.namespace_path.extend(names::split_scope(&class));
                f.class_name = None;
                f.access = Access::Free;
                f.member_kind = MemberKind::Function;
            } else {
                log::debug!(
                    "{}: no declaration found for {}, assuming public",
                    unit.path,
                    f.qualified_name
                );
            }
        }
    }
}

/// Check the structural invariants of a unit; returns a description of the
/// first violation.
pub fn check_unit(unit: &SourceUnit) -> std::result::Result<(), String> {
    if !unit.parse_ok && (!unit.functions.is_empty() || !unit.classes.is_empty()) {
        return Err(format!("{}: parse failure but records present", unit.path));
    }
    let mut seen: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for f in &unit.functions {
        if f.line_span.start == 0 || f.line_span.end > unit.line_count || f.line_span.start > f.line_span.end {
            return Err(format!("{}: {} has span outside the file", unit.path, f.qualified_name));
        }
        if f.has_branches != (f.branch_count > 0) {
            return Err(format!(
                "{}: {} branch flag disagrees with count",
                unit.path, f.qualified_name
            ));
        }
        if (f.access == Access::Free) != f.class_name.is_none() {
            return Err(format!(
                "{}: {} access disagrees with class",
                unit.path, f.qualified_name
            ));
        }
        let entry = seen.entry(&f.qualified_name).or_default();
        if f.is_definition {
            entry.0 += 1;
        } else {
            entry.1 += 1;
        }
        if entry.0 > 1 || entry.1 > 1 {
            return Err(format!("{}: duplicate record for {}", unit.path, f.qualified_name));
        }
    }
    for c in &unit.classes {
        for m in &c.public_methods {
            let ok = unit
                .functions
                .iter()
                .any(|f| &f.qualified_name == m && f.access == Access::Public);
            if !ok {
                return Err(format!("{}: public method {} unresolved", unit.path, m));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_is_first_component_under_src() {
        assert_eq!(module_of("src/localization/ekf/src/a.cpp"), "localization");
        assert_eq!(module_of("pkg/a.cpp"), "pkg");
    }

    #[test]
    fn link_converts_namespace_qualified_definitions() {
        let header = parse_unit("h.hpp", "namespace g { int f(int x); }");
        let source = parse_unit("s.cpp", "int g::f(int x) { return x ? 1 : 0; }");
        let mut units = vec![header, source];
        link_package(&mut units);
        let f = &units[1].functions[0];
        assert_eq!(f.access, Access::Free);
        assert_eq!(f.namespace_path, vec!["g"]);
        assert_eq!(f.class_name, None);
        assert_eq!(f.qualified_name, "g::f(int)");
    }

    #[test]
    fn link_copies_access_from_class_declaration() {
        let header = parse_unit(
            "h.hpp",
            "namespace n { class C { public: void a(); private: int b(int) const; }; }",
        );
        let source = parse_unit(
            "s.cpp",
            "namespace n { void C::a() {} int C::b(int v) const { return v; } }",
        );
        let mut units = vec![header, source];
        link_package(&mut units);
        let access: Vec<Access> = units[1].functions.iter().map(|f| f.access).collect();
        assert_eq!(access, vec![Access::Public, Access::Private]);
        for u in &units {
            check_unit(u).unwrap();
        }
    }
}
