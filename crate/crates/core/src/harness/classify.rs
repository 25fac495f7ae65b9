//! Rule-based classification of compiler logs and test failures.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::source::SourceUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BuildErrorCategory {
    Namespace,
    Symbol,
    Type,
    Header,
    Syntax,
    Access,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BuildErrorDetail {
    MissingNamespace,
    IncorrectNamespace,
    NonexistentMember,
    MisuseExistingMember,
    UseBeforeDefinition,
    TypeInconsistency,
    IncludeNonexistentHeader,
    MissingNecessaryHeader,
    NotInHeader,
    Syntax,
    PrivateAccess,
    ProtectedAccess,
    Other,
}

impl BuildErrorDetail {
    pub const ALL: [BuildErrorDetail; 13] = [
        Self::MissingNamespace,
        Self::IncorrectNamespace,
        Self::NonexistentMember,
        Self::MisuseExistingMember,
        Self::UseBeforeDefinition,
        Self::TypeInconsistency,
        Self::IncludeNonexistentHeader,
        Self::MissingNecessaryHeader,
        Self::NotInHeader,
        Self::Syntax,
        Self::PrivateAccess,
        Self::ProtectedAccess,
        Self::Other,
    ];

    pub fn category(self) -> BuildErrorCategory {
        use BuildErrorDetail::*;
        match self {
            MissingNamespace | IncorrectNamespace => BuildErrorCategory::Namespace,
            NonexistentMember | MisuseExistingMember | UseBeforeDefinition => BuildErrorCategory::Symbol,
            TypeInconsistency => BuildErrorCategory::Type,
            IncludeNonexistentHeader | MissingNecessaryHeader | NotInHeader => BuildErrorCategory::Header,
            Syntax => BuildErrorCategory::Syntax,
            PrivateAccess | ProtectedAccess => BuildErrorCategory::Access,
            Other => BuildErrorCategory::Other,
        }
    }

    /// Row label used in the build-error table.
    pub fn label(self) -> &'static str {
        use BuildErrorDetail::*;
        match self {
            MissingNamespace => "Missing namespace",
            IncorrectNamespace => "Incorrect namespace",
            NonexistentMember => "Invoking nonexistent member",
            MisuseExistingMember => "Misuse existing member",
            UseBeforeDefinition => "Use before definition",
            TypeInconsistency => "Type inconsistency",
            IncludeNonexistentHeader => "Include nonexistent headers",
            MissingNecessaryHeader => "Missing necessary headers",
            NotInHeader => "Function/class not in headers",
            Syntax => "Syntax",
            PrivateAccess => "Private access",
            ProtectedAccess => "Protected access",
            Other => "Other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildErrorClass {
    pub category: BuildErrorCategory,
    pub detail: BuildErrorDetail,
    /// The diagnostic line that triggered the rule, verbatim.
    pub evidence_line: String,
}

impl BuildErrorClass {
    pub fn new(detail: BuildErrorDetail, evidence_line: impl Into<String>) -> Self {
        Self {
            category: detail.category(),
            detail,
            evidence_line: evidence_line.into(),
        }
    }
}

/// What the workspace declares, so that "not declared" diagnostics can be
/// told apart (wrong namespace, header not included, symbol private to a
/// translation unit).
#[derive(Debug, Clone, Default)]
pub struct ClassifyContext {
    /// Simple name to the scopes declaring it in headers; `true` marks a
    /// namespace (not class) scope.
    pub header_symbols: BTreeMap<String, BTreeSet<(String, bool)>>,
    /// Free functions defined in sources but declared in no header.
    pub source_only: BTreeSet<String>,
    /// Namespaces opened anywhere in the workspace.
    pub namespaces: BTreeSet<String>,
}

impl ClassifyContext {
    pub fn from_units<'a>(units: impl IntoIterator<Item = &'a SourceUnit>) -> Self {
        let mut ctx = ClassifyContext::default();
        let mut defined_in_sources = BTreeSet::new();
        for unit in units {
            for f in &unit.functions {
                let ns = f.namespace().unwrap_or_default();
                for part in f.namespace_path.iter().filter(|p| !p.starts_with('(')) {
                    ctx.namespaces.insert(part.clone());
                }
                if !ns.is_empty() {
                    ctx.namespaces.insert(ns.clone());
                }
                if unit.is_header() {
                    let in_class = f.class_name.is_some();
                    ctx.header_symbols
                        .entry(f.simple_name.clone())
                        .or_default()
                        .insert((if in_class { f.scope_path() } else { ns }, !in_class));
                } else if f.class_name.is_none() && f.is_definition && f.simple_name != "main" {
                    defined_in_sources.insert(f.simple_name.clone());
                }
            }
            if unit.is_header() {
                for c in &unit.classes {
                    let (scope, simple) = match c.qualified_name.rsplit_once("::") {
                        Some((s, n)) => (s.to_string(), n.to_string()),
                        None => (String::new(), c.qualified_name.clone()),
                    };
                    ctx.header_symbols.entry(simple).or_default().insert((scope, true));
                }
            }
        }
        ctx.source_only = defined_in_sources
            .into_iter()
            .filter(|n| !ctx.header_symbols.contains_key(n))
            .collect();
        ctx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Severity {
    Error,
    Note,
    Linker,
}

#[derive(Debug, Clone)]
struct Diagnostic {
    location: Option<(String, u32)>,
    severity: Severity,
    message: String,
    raw: String,
    source_line: Option<String>,
    notes: Vec<String>,
}

macro_rules! re {
    ($name:ident, $pat:expr) => {
        static $name: LazyLock<Regex> = LazyLock::new(|| Regex::new($pat).unwrap());
    };
}

re!(
    DIAG,
    r"^(?P<file>[^\s:][^:]*):(?P<line>\d+):(?:\d+:)? (?P<sev>fatal error|error|note|warning): (?P<msg>.*)$"
);
re!(SNIPPET, r"^\s*\d+\s\|\s?(?P<code>.*)$");
re!(
    LINKER,
    r"(?:undefined reference to|multiple definition of|cannot find -l)"
);
re!(
    NOT_DECLARED,
    r"^'(?P<name>[^']+)' was not declared in this scope(?:; did you mean '(?P<hint>[^']+)'\?)?"
);
re!(
    NOT_MEMBER,
    r"^'(?P<name>[^']+)' is not a member of '(?P<scope>[^']+)'(?:; did you mean '(?P<hint>[^']+)'\?)?"
);
re!(
    NOT_TYPE,
    r"^'(?P<name>[^']+)' (?:in namespace '(?P<scope>[^']+)' )?does not name a type(?:; did you mean '(?P<hint>[^']+)'\?)?"
);
re!(HAS_NOT_BEEN_DECLARED, r"^'(?P<name>[^']+)' has not been declared");
re!(FORGOT_INCLUDE, r"did you forget to '#include");
re!(IDENT, r"[A-Za-z_][A-Za-z0-9_]*");

/// Identifiers and macros whose header g++ does not suggest.
const STD_HEADER_SYMBOLS: &[&str] = &[
    "M_PI",
    "M_PI_2",
    "M_PI_4",
    "M_E",
    "M_SQRT2",
    "INFINITY",
    "NAN",
    "accumulate",
    "iota",
    "inner_product",
    "partial_sum",
    "gcd",
    "lcm",
    "setprecision",
    "setw",
];

fn parse_diagnostics(log: &str) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = Vec::new();
    for line in log.lines() {
        if let Some(c) = DIAG.captures(line) {
            let severity = match &c["sev"] {
                "note" => Severity::Note,
                "warning" => continue,
                _ => Severity::Error,
            };
            let message = c["msg"].to_string();
            if severity == Severity::Note {
                if let Some(last) = out.last_mut() {
                    last.notes.push(message);
                }
                continue;
            }
            out.push(Diagnostic {
                location: Some((c["file"].to_string(), c["line"].parse().unwrap_or(0))),
                severity,
                message,
                raw: line.to_string(),
                source_line: None,
                notes: Vec::new(),
            });
        } else if LINKER.is_match(line) {
            out.push(Diagnostic {
                location: None,
                severity: Severity::Linker,
                message: line.to_string(),
                raw: line.to_string(),
                source_line: None,
                notes: Vec::new(),
            });
        } else if let Some(c) = SNIPPET.captures(line) {
            if let Some(last) = out.last_mut() {
                if last.source_line.is_none() && last.notes.is_empty() {
                    last.source_line = Some(c["code"].to_string());
                }
            }
        }
    }
    out
}

fn last_segment(name: &str) -> &str {
    name.rsplit("::").next().unwrap_or(name)
}

fn hint_qualifies(name: &str, hint: Option<&str>) -> bool {
    hint.is_some_and(|h| h.contains("::") && last_segment(h) == name)
}

/// Classification of an undeclared `name`, optionally looked up in `scope`.
fn undeclared(name: &str, scope: Option<&str>, hint: Option<&str>, ctx: &ClassifyContext) -> BuildErrorDetail {
    use BuildErrorDetail::*;
    if STD_HEADER_SYMBOLS.contains(&name) && scope.is_none_or(|s| s == "std") {
        return MissingNecessaryHeader;
    }
    if hint_qualifies(name, hint) {
        return if scope.is_some() {
            IncorrectNamespace
        } else {
            MissingNamespace
        };
    }
    match scope {
        None => {
            if ctx.header_symbols.contains_key(name) {
                MissingNamespace
            } else if ctx.source_only.contains(name) {
                NotInHeader
            } else {
                NonexistentMember
            }
        }
        Some(scope) => {
            let in_other_namespace = ctx
                .header_symbols
                .get(name)
                .is_some_and(|scopes| scopes.iter().any(|(s, is_ns)| *is_ns && s != scope));
            if in_other_namespace && ctx.namespaces.contains(scope) {
                IncorrectNamespace
            } else if ctx.source_only.contains(name) {
                NotInHeader
            } else {
                NonexistentMember
            }
        }
    }
}

fn classify_one(d: &Diagnostic, ctx: &ClassifyContext) -> BuildErrorDetail {
    use BuildErrorDetail::*;
    let m = d.message.as_str();
    if d.severity == Severity::Linker {
        return if m.contains("undefined reference to") {
            NotInHeader
        } else {
            Other
        };
    }
    if m.ends_with("No such file or directory") {
        return IncludeNonexistentHeader;
    }
    if m.contains("is private within this context") {
        return PrivateAccess;
    }
    if m.contains("is protected within this context") {
        return ProtectedAccess;
    }
    if d.notes.iter().any(|n| FORGOT_INCLUDE.is_match(n)) {
        return MissingNecessaryHeader;
    }
    if m.contains("before deduction of 'auto'") || m.contains("incomplete type") {
        return UseBeforeDefinition;
    }
    if m.starts_with("expected ")
        || m.contains("without a previous 'if'")
        || m.starts_with("stray '")
        || m.contains("at end of input")
    {
        return Syntax;
    }
    if let Some(c) = NOT_DECLARED.captures(m) {
        return undeclared(&c["name"], None, c.name("hint").map(|h| h.as_str()), ctx);
    }
    if let Some(c) = NOT_MEMBER.captures(m) {
        return undeclared(&c["name"], Some(&c["scope"]), c.name("hint").map(|h| h.as_str()), ctx);
    }
    if let Some(c) = NOT_TYPE.captures(m) {
        let scope = c.name("scope").map(|s| s.as_str());
        return undeclared(&c["name"], scope, c.name("hint").map(|h| h.as_str()), ctx);
    }
    if let Some(c) = HAS_NOT_BEEN_DECLARED.captures(m) {
        let name = &c["name"];
        if ctx.namespaces.contains(name) {
            return MissingNecessaryHeader;
        }
        let qualifier = format!("{name}::");
        return if d.source_line.as_deref().is_some_and(|s| s.contains(&qualifier)) {
            IncorrectNamespace
        } else {
            NonexistentMember
        };
    }
    if m.contains("has no member named") {
        return NonexistentMember;
    }
    const MISUSE: &[&str] = &[
        "no matching function for call to",
        "too many arguments to",
        "too few arguments to",
        "without object",
        "as 'this' argument discards qualifiers",
        "invalid use of non-static member",
        "is not a static data member",
        "use of deleted function",
    ];
    if MISUSE.iter().any(|p| m.contains(p)) {
        return MisuseExistingMember;
    }
    const TYPE: &[&str] = &[
        "cannot convert",
        "invalid conversion",
        "requested",
        "no match for 'operator",
        "invalid operands",
        "cannot bind",
        "narrowing conversion",
        "could not convert",
        "invalid initialization of",
        "incompatible types",
    ];
    if TYPE.iter().any(|p| m.contains(p)) {
        return TypeInconsistency;
    }
    Other
}

/// Classify a failed build log. Distinct details are reported in order of
/// first appearance.
///
/// Cascades are collapsed: on a source line that has a missing-header or
/// syntax diagnostic only that diagnostic counts, and a later "not declared"
/// for a name introduced on such a line is dropped.
pub fn classify_build_error(log_text: &str, ctx: &ClassifyContext) -> Vec<BuildErrorClass> {
    use BuildErrorDetail::*;
    let diags = parse_diagnostics(log_text);
    let classified: Vec<(&Diagnostic, BuildErrorDetail)> = diags.iter().map(|d| (d, classify_one(d, ctx))).collect();

    let mut root_lines: BTreeMap<&(String, u32), BuildErrorDetail> = BTreeMap::new();
    for (d, detail) in &classified {
        if let (Some(loc), MissingNecessaryHeader | Syntax) = (&d.location, detail) {
            let e = root_lines.entry(loc).or_insert(*detail);
            if *detail == MissingNecessaryHeader {
                *e = MissingNecessaryHeader;
            }
        }
    }
    let mut poisoned: BTreeSet<String> = BTreeSet::new();
    let mut out: Vec<BuildErrorClass> = Vec::new();
    for (d, detail) in classified {
        let root = d.location.as_ref().and_then(|l| root_lines.get(l)).copied();
        if root.is_some_and(|r| r != detail) {
            continue;
        }
        let undeclared_name = NOT_DECLARED.captures(&d.message).map(|c| c["name"].to_string());
        if undeclared_name.as_ref().is_some_and(|n| poisoned.contains(n)) && root.is_none() {
            continue;
        }
        if root.is_some() {
            if let Some(src) = &d.source_line {
                poisoned.extend(IDENT.find_iter(src).map(|i| i.as_str().to_string()));
            }
        }
        if !out.iter().any(|c| c.detail == detail) {
            out.push(BuildErrorClass::new(detail, d.raw.clone()));
        }
    }
    if out.is_empty() {
        let evidence = log_text
            .lines()
            .find(|l| l.contains("error"))
            .or_else(|| log_text.lines().find(|l| !l.trim().is_empty()))
            .unwrap_or("");
        out.push(BuildErrorClass::new(Other, evidence));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuntimeClass {
    AssertionError,
    OutOfRange,
    InvalidArgument,
    OtherException,
    Timeout,
}

impl RuntimeClass {
    pub const ALL: [RuntimeClass; 5] = [
        Self::AssertionError,
        Self::OutOfRange,
        Self::InvalidArgument,
        Self::OtherException,
        Self::Timeout,
    ];
}

re!(GTEST_FAILURE, r"^.+:\d+: Failure$");
re!(
    GTEST_EXCEPTION,
    r#"C\+\+ exception with description "(?P<what>.*)" thrown"#
);
re!(
    TERMINATE,
    r"terminate called after throwing an instance of '(?P<ty>[^']+)'"
);
re!(WHAT, r"^\s*what\(\):\s*(?P<what>.*)$");

fn exception_class(type_name: Option<&str>, what: Option<&str>) -> RuntimeClass {
    match type_name {
        Some("std::out_of_range") => return RuntimeClass::OutOfRange,
        Some("std::invalid_argument") => return RuntimeClass::InvalidArgument,
        _ => {}
    }
    let what = what.unwrap_or("");
    const RANGE: &[&str] = &[
        "_M_range_check",
        "out of range",
        "out_of_range",
        "basic_string::at",
        "::substr",
        "map::at",
    ];
    const CONVERT: &[&str] = &["stoi", "stol", "stoul", "stoll", "stoull", "stof", "stod", "stold"];
    if RANGE.iter().any(|p| what.contains(p)) {
        RuntimeClass::OutOfRange
    } else if CONVERT.contains(&what.trim()) || what.contains("invalid argument") || what.contains("invalid_argument") {
        RuntimeClass::InvalidArgument
    } else {
        RuntimeClass::OtherException
    }
}

/// Classify a failing case from its console output. The first decisive line
/// wins; output without one is an `OtherException` (aborts, signals).
pub fn classify_runtime_error(output: &str, timed_out: bool) -> RuntimeClass {
    if timed_out {
        return RuntimeClass::Timeout;
    }
    let lines: Vec<&str> = output.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        if GTEST_FAILURE.is_match(line) && !line.starts_with("unknown file") {
            return RuntimeClass::AssertionError;
        }
        if let Some(c) = GTEST_EXCEPTION.captures(line) {
            return exception_class(None, Some(&c["what"]));
        }
        if let Some(c) = TERMINATE.captures(line) {
            let what = lines
                .get(i + 1)
                .and_then(|l| WHAT.captures(l))
                .map(|w| w["what"].to_string());
            return exception_class(Some(&c["ty"]), what.as_deref());
        }
    }
    RuntimeClass::OtherException
}
