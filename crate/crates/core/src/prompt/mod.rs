//! Test-generation and documentation prompts.
//!
//! Three prompt kinds exist. The basic prompt carries the focal signature and
//! the whole focal file. The context-rich prompt carries the focal file plus
//! namespace, headers, document, package dependencies and caller examples,
//! each under a fixed heading and omitted when empty. The documentation
//! prompt asks for a three-part description of an undocumented focal.

pub mod doc;
pub mod template;

use std::collections::{BTreeMap, BTreeSet};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::callgraph::CallerExample;
use crate::source::{ClassRecord, FunctionRecord, SourceUnit};

pub use doc::{from_comment, parse_doc_response, DocOrigin, GeneratedDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    Basic,
    Awtest,
    Docgen,
}

impl std::str::FromStr for PromptMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "basic" => Ok(PromptMode::Basic),
            "awtest" => Ok(PromptMode::Awtest),
            "docgen" => Ok(PromptMode::Docgen),
            other => Err(format!("unknown prompt mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    FocalFile,
    Signature,
    Namespace,
    Headers,
    Doc,
    ExternalDeps,
    CallerExamples,
}

impl Section {
    /// Heading line that opens the section in the user text.
    pub fn heading(self) -> &'static str {
        match self {
            Section::FocalFile => "### Focal file",
            Section::Signature => "### Signature",
            Section::Namespace => "### Namespace",
            Section::Headers => "### Headers",
            Section::Doc => "### Function document",
            Section::ExternalDeps => "### Package dependencies",
            Section::CallerExamples => "### Usage examples",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct PromptBundle {
    pub mode: PromptMode,
    pub system_text: String,
    pub user_text: String,
    pub focal: String,
    pub sections_present: BTreeSet<Section>,
    pub token_estimate: usize,
}

impl PromptBundle {
    fn new(mode: PromptMode, focal: &str, user_text: String, sections: BTreeSet<Section>) -> Self {
        let system_text = template::SYSTEM.to_string();
        let token_estimate = (system_text.chars().count() + user_text.chars().count()).div_ceil(4);
        Self {
            mode,
            system_text,
            user_text,
            focal: focal.to_string(),
            sections_present: sections,
            token_estimate,
        }
    }

    /// Every listed section heading appears exactly once and no unlisted
    /// heading appears. Returns the first problem found.
    pub fn lint(&self) -> Result<(), String> {
        let all = [
            Section::FocalFile,
            Section::Signature,
            Section::Namespace,
            Section::Headers,
            Section::Doc,
            Section::ExternalDeps,
            Section::CallerExamples,
        ];
        for s in all {
            let n = self.user_text.lines().filter(|l| l.starts_with(s.heading())).count();
            let expected = usize::from(self.sections_present.contains(&s));
            if n != expected {
                return Err(format!("section {:?} occurs {n} times, expected {expected}", s));
            }
        }
        Ok(())
    }
}

/// Context gathered by upstream stages for one focal function.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AwtestContext {
    pub namespace: Option<String>,
    pub class: Option<ClassRecord>,
    pub headers: Vec<String>,
    pub doc: Option<GeneratedDoc>,
    pub external_deps: Vec<String>,
    pub examples: Vec<CallerExample>,
}

fn fence(code: &str) -> String {
    let body = code.strip_suffix('\n').unwrap_or(code);
    format!("```cpp\n{body}\n```")
}

fn focal_file_section(unit: &SourceUnit, file_text: &str) -> String {
    format!("{} ({})\n{}", Section::FocalFile.heading(), unit.path, fence(file_text))
}

fn signature_of(focal: &FunctionRecord) -> String {
    focal.signature_text.trim().to_string()
}

pub fn build_basic_prompt(focal: &FunctionRecord, unit: &SourceUnit, file_text: &str) -> PromptBundle {
    basic_prompt(&focal.qualified_name, &signature_of(focal), &unit.path, file_text)
}

/// Basic prompt from raw parts, for focal files that no longer parse and so
/// carry no function records.
pub fn basic_prompt(qualified_name: &str, signature: &str, path: &str, file_text: &str) -> PromptBundle {
    let vars = BTreeMap::from([
        ("signature", signature.trim().to_string()),
        ("focal_path", path.to_string()),
        (
            "focal_file",
            file_text.strip_suffix('\n').unwrap_or(file_text).to_string(),
        ),
    ]);
    let user = template::render(template::BASIC, &vars);
    PromptBundle::new(
        PromptMode::Basic,
        qualified_name,
        user,
        BTreeSet::from([Section::Signature, Section::FocalFile]),
    )
}

/// Declarator text starting at 1-based `line`, up to the opening brace or
/// semicolon, with whitespace collapsed.
pub fn signature_at_line(file_text: &str, line: u32) -> String {
    let rest: Vec<&str> = file_text.lines().skip(line.saturating_sub(1) as usize).collect();
    let joined = rest.join("\n");
    let end = joined.find(['{', ';']).unwrap_or(joined.len());
    joined[..end].split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn build_docgen_prompt(focal: &FunctionRecord, unit: &SourceUnit, file_text: &str) -> PromptBundle {
    let vars = BTreeMap::from([
        ("focal", focal.qualified_name.clone()),
        ("signature", signature_of(focal)),
        ("focal_path", unit.path.clone()),
        (
            "focal_file",
            file_text.strip_suffix('\n').unwrap_or(file_text).to_string(),
        ),
    ]);
    let user = template::render(template::DOCGEN, &vars);
    PromptBundle::new(
        PromptMode::Docgen,
        &focal.qualified_name,
        user,
        BTreeSet::from([Section::Signature, Section::FocalFile]),
    )
}

fn class_summary(c: &ClassRecord) -> String {
    let kind = match c.kind {
        crate::source::ClassKind::Class => "class",
        crate::source::ClassKind::Struct => "struct",
    };
    let mut s = format!("The focal function is a member of {kind} `{}`.", c.qualified_name);
    if !c.constructors.is_empty() {
        s.push_str("\nPublic constructors:");
        for k in &c.constructors {
            s.push_str(&format!("\n- {k}"));
        }
    }
    if !c.public_methods.is_empty() {
        s.push_str("\nPublic methods:");
        for m in &c.public_methods {
            s.push_str(&format!("\n- {m}"));
        }
    }
    s.push_str("\nOnly public members may be used from a test.");
    s
}

/// Assemble the context-rich prompt. Sections appear in a fixed order:
/// focal file, namespace, headers, document, dependencies, examples.
pub fn build_awtest_prompt(
    focal: &FunctionRecord,
    unit: &SourceUnit,
    file_text: &str,
    ctx: &AwtestContext,
) -> PromptBundle {
    let mut present = BTreeSet::from([Section::FocalFile]);
    let mut parts = vec![focal_file_section(unit, file_text)];

    if ctx.namespace.is_some() || ctx.class.is_some() {
        let mut body = Vec::new();
        if let Some(ns) = &ctx.namespace {
            body.push(format!("The focal function is declared in namespace `{ns}`."));
        }
        if let Some(c) = &ctx.class {
            body.push(class_summary(c));
        }
        parts.push(format!("{}\n{}", Section::Namespace.heading(), body.join("\n")));
        present.insert(Section::Namespace);
    }
    if !ctx.headers.is_empty() {
        parts.push(format!("{}\n{}", Section::Headers.heading(), ctx.headers.join("\n")));
        present.insert(Section::Headers);
    }
    if let Some(d) = &ctx.doc {
        parts.push(format!("{}\n{}", Section::Doc.heading(), d.render()));
        present.insert(Section::Doc);
    }
    if !ctx.external_deps.is_empty() {
        let list: Vec<String> = ctx.external_deps.iter().map(|d| format!("- {d}")).collect();
        parts.push(format!(
            "{}\nThe package links against:\n{}",
            Section::ExternalDeps.heading(),
            list.join("\n")
        ));
        present.insert(Section::ExternalDeps);
    }
    if !ctx.examples.is_empty() {
        let mut body = String::from("Functions in the package that call the focal function:");
        for e in &ctx.examples {
            body.push_str(&format!("\n{}", fence(&e.snippet)));
        }
        parts.push(format!("{}\n{}", Section::CallerExamples.heading(), body));
        present.insert(Section::CallerExamples);
    }
    let sections = format!("\n{}", parts.join("\n\n"));
    let vars = BTreeMap::from([("focal", focal.qualified_name.clone()), ("sections", sections)]);
    let user = template::render(template::AWTEST, &vars);
    PromptBundle::new(PromptMode::Awtest, &focal.qualified_name, user, present)
}

/// Context-rich prompting needs a clean parse of the focal's unit.
pub fn plan_prompt(unit_parse_ok: bool, force_basic: bool) -> PromptMode {
    if unit_parse_ok && !force_basic {
        PromptMode::Awtest
    } else {
        PromptMode::Basic
    }
}

/// Include directives for the prompt: those of the focal unit, plus the
/// unit itself when it is a public header.
pub fn header_lines(unit: &SourceUnit) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    if unit.is_header() {
        if let Some(i) = unit.path.find("/include/") {
            out.push(format!("#include \"{}\"", &unit.path[i + "/include/".len()..]));
        }
    }
    for inc in &unit.includes {
        let d = inc.directive();
        if !out.contains(&d) {
            out.push(d);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parse_unit;

    const SRC: &str = "#include \"p/a.hpp\"\nnamespace p {\nint f(int x) {\n  if (x) return 1;\n  return 0;\n}\n}\n";

    fn focal() -> (SourceUnit, FunctionRecord) {
        let u = parse_unit("src/m/p/src/a.cpp", SRC);
        let f = u.functions[0].clone();
        (u, f)
    }

    #[test]
    fn signature_from_text() {
        let text = "int a;\n\nstd::size_t find(\n  const std::vector<int> & v,\n  int x)\n{\n  return 0;\n}\n";
        assert_eq!(
            signature_at_line(text, 3),
            "std::size_t find( const std::vector<int> & v, int x)"
        );
        assert_eq!(signature_at_line(text, 99), "");
    }

    #[test]
    fn basic_has_two_sections_and_is_deterministic() {
        let (u, f) = focal();
        let a = build_basic_prompt(&f, &u, SRC);
        assert_eq!(
            a.sections_present,
            BTreeSet::from([Section::Signature, Section::FocalFile])
        );
        assert_eq!(a, build_basic_prompt(&f, &u, SRC));
        assert!(a.user_text.contains("int f(int x)"));
        assert!(a.user_text.contains("maximize code coverage"));
        a.lint().unwrap();
    }

    #[test]
    fn awtest_sections_follow_inputs() {
        let (u, f) = focal();
        let bare = build_awtest_prompt(
            &f,
            &u,
            SRC,
            &AwtestContext {
                namespace: Some("p".into()),
                ..Default::default()
            },
        );
        assert_eq!(
            bare.sections_present,
            BTreeSet::from([Section::FocalFile, Section::Namespace])
        );
        bare.lint().unwrap();
        let full_ctx = AwtestContext {
            namespace: Some("p".into()),
            class: None,
            headers: header_lines(&u),
            doc: Some(GeneratedDoc {
                description: "d".into(),
                param_notes: vec![],
                return_note: String::new(),
                origin: DocOrigin::Llm,
            }),
            external_deps: vec!["rclcpp".into()],
            examples: vec![CallerExample {
                caller: "g()".into(),
                snippet: "int g() { return f(1); }".into(),
                call_site_line: 1,
                rank_key: 24,
            }],
        };
        let full = build_awtest_prompt(&f, &u, SRC, &full_ctx);
        assert_eq!(full.sections_present.len(), 6);
        assert!(!full.sections_present.contains(&Section::Signature));
        assert!(full.token_estimate > bare.token_estimate);
        full.lint().unwrap();
        let order: Vec<usize> = [
            Section::FocalFile,
            Section::Namespace,
            Section::Headers,
            Section::Doc,
            Section::ExternalDeps,
            Section::CallerExamples,
        ]
        .iter()
        .map(|s| full.user_text.find(s.heading()).unwrap())
        .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn docgen_asks_for_three_headings() {
        let (u, f) = focal();
        let p = build_docgen_prompt(&f, &u, SRC);
        for h in ["Functionality:", "Arguments:", "Return value:"] {
            assert!(p.user_text.contains(h));
        }
        assert_eq!(p.mode, PromptMode::Docgen);
    }

    #[test]
    fn planning() {
        assert_eq!(plan_prompt(false, false), PromptMode::Basic);
        assert_eq!(plan_prompt(true, false), PromptMode::Awtest);
        assert_eq!(plan_prompt(true, true), PromptMode::Basic);
    }
}
