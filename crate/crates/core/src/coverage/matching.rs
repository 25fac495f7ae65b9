//! Matching demangled coverage names against source-model records.
//!
//! Demangled names spell types the way the compiler sees them
//! (`std::__cxx11::basic_string<char, ...> const&`, `unsigned long`), while
//! the source model keeps them as written (`const std::string&`,
//! `std::size_t`). Both sides are reduced to a loose key: scope prefixes,
//! template arguments, `const` qualifiers on parameters and whitespace are
//! dropped and a few standard aliases are unified. When keys disagree (for
//! instance a template whose parameters are spelled `T`), an entry starting
//! on the record's first line is taken instead.

use std::collections::{BTreeMap, BTreeSet};

use crate::source::names::{split_top_level_commas, strip_template_args};
use crate::source::FunctionRecord;

use super::lcov::FileCoverage;

const ANON: &str = "(anonymous namespace)";

/// Outcome of matching one file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FunctionMatch {
    /// Qualified name of each definition to its summed hit count. Records
    /// without any coverage entry are absent.
    pub hits: BTreeMap<String, u64>,
    /// Coverage entries no record claimed (implicit members, lambdas, ...).
    pub unmatched_entries: Vec<String>,
    /// Definitions without a coverage entry (never compiled or inlined away).
    pub unmatched_records: Vec<String>,
}

impl FunctionMatch {
    pub fn hit(&self, qualified_name: &str) -> u64 {
        self.hits.get(qualified_name).copied().unwrap_or(0)
    }

    pub fn is_covered(&self, qualified_name: &str) -> bool {
        self.hit(qualified_name) > 0
    }
}

/// Byte index of the `(` opening the parameter list, scanning from the end.
fn params_open(name: &str) -> Option<usize> {
    let bytes = name.as_bytes();
    let mut end = name.trim_end().len();
    let trimmed = &name[..end];
    if let Some(stripped) = trimmed.strip_suffix("const") {
        if stripped.ends_with(')') || stripped.ends_with(' ') {
            end = stripped.trim_end().len();
        }
    }
    if end == 0 || bytes[end - 1] != b')' {
        return None;
    }
    let mut depth = 0i32;
    for i in (0..end).rev() {
        match bytes[i] {
            b')' => depth += 1,
            b'(' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Index just past the last space outside any bracket; the return type of
/// a demangled template instance ends there.
fn last_top_level_space(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    let mut found = None;
    for (i, c) in s.char_indices() {
        match c {
            '<' | '(' | '[' => depth += 1,
            '>' | ')' | ']' => depth -= 1,
            ' ' if depth == 0 => found = Some(i + 1),
            _ => {}
        }
    }
    found
}

fn alias(t: &str) -> &str {
    match t {
        "basic_string" => "string",
        "size_t" | "uint64_t" | "unsignedlong" | "unsignedlongint" => "unsignedlong",
        "ptrdiff_t" | "int64_t" | "long" | "longint" | "ssize_t" => "long",
        "int32_t" | "int" | "signed" | "signedint" => "int",
        "uint32_t" | "unsigned" | "unsignedint" => "unsignedint",
        "int16_t" | "short" | "shortint" => "short",
        "uint16_t" | "unsignedshort" => "unsignedshort",
        "int8_t" | "signedchar" => "signedchar",
        "uint8_t" | "unsignedchar" => "unsignedchar",
        other => other,
    }
}

fn param_key(p: &str) -> String {
    let no_templates = strip_template_args(p);
    let words: Vec<&str> = no_templates
        .split(|c: char| c.is_whitespace())
        .filter(|w| !w.is_empty() && *w != "const" && *w != "volatile" && *w != "struct" && *w != "class")
        .collect();
    let joined = words.join("").replace("const*", "*").replace("const&", "&");
    let split = joined.find(['*', '&']).unwrap_or(joined.len());
    let (base, suffix) = joined.split_at(split);
    let base = base.rsplit("::").next().unwrap_or(base);
    format!("{}{}", alias(base), suffix)
}

/// Loose matching key for a function name, demangled or source-spelled.
pub fn match_key(name: &str) -> String {
    let name = name.replace("[abi:cxx11]", "");
    let Some(open) = params_open(&name) else {
        return name.split_whitespace().collect();
    };
    let mut head = &name[..open];
    if !head.contains("operator") {
        if let Some(i) = last_top_level_space(head) {
            head = &head[i..];
        }
    }
    let close = name[open..].rfind(')').map(|i| open + i).unwrap_or(name.len());
    let tail_const = name[close + 1..].trim() == "const";
    let scope: Vec<String> = split_scope_loose(head).into_iter().filter(|s| s != ANON).collect();
    let params: Vec<String> = split_top_level_commas(&name[open + 1..close])
        .iter()
        .map(|p| param_key(p))
        .filter(|p| !p.is_empty() && p != "void")
        .collect();
    let mut key = format!("{}({})", scope.join("::"), params.join(","));
    if tail_const {
        key.push_str(" const");
    }
    key
}

fn split_scope_loose(head: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let chars: Vec<char> = head.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '<' | '(' => depth += 1,
            '>' | ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && c == ':' && chars.get(i + 1) == Some(&':') {
            out.push(std::mem::take(&mut cur));
            i += 2;
            continue;
        }
        cur.push(c);
        i += 1;
    }
    out.push(cur);
    out.into_iter()
        .map(|s| {
            if s.starts_with("operator") || s == ANON {
                s
            } else {
                strip_template_args(&s).trim().to_string()
            }
        })
        .collect()
}

/// Match the definitions of one file against its coverage record. Several
/// entries folding onto one record (template instances) are summed.
pub fn match_functions(records: &[&FunctionRecord], coverage: &FileCoverage) -> FunctionMatch {
    let mut by_key: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    let mut by_line: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
    for name in coverage.function_hits.keys() {
        by_key.entry(match_key(name)).or_default().push(name);
        if let Some(l) = coverage.function_lines.get(name) {
            by_line.entry(*l).or_default().push(name);
        }
    }
    let mut claimed: BTreeSet<&str> = BTreeSet::new();
    let mut out = FunctionMatch::default();
    for r in records.iter().filter(|r| r.is_definition) {
        let mut names: Vec<&str> = by_key.get(&match_key(&r.qualified_name)).cloned().unwrap_or_default();
        if names.is_empty() {
            names = by_line
                .get(&r.line_span.start)
                .map(|v| v.iter().copied().filter(|n| !claimed.contains(n)).collect())
                .unwrap_or_default();
        }
        if names.is_empty() {
            out.unmatched_records.push(r.qualified_name.clone());
            continue;
        }
        let total: u64 = names.iter().map(|n| coverage.function_hits[*n]).sum();
        claimed.extend(names);
        *out.hits.entry(r.qualified_name.clone()).or_default() += total;
    }
    out.unmatched_entries = coverage
        .function_hits
        .keys()
        .filter(|n| !claimed.contains(n.as_str()))
        .cloned()
        .collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parse_unit;

    #[test]
    fn keys_agree_across_spellings() {
        let pairs = [
            ("a::f(int)", "a::f(int)"),
            (
                "ekf::parse(std::__cxx11::basic_string<char, std::char_traits<char>, std::allocator<char> > const&)",
                "ekf::parse(const std::string&)",
            ),
            ("ekf::B::at(unsigned long) const", "ekf::B::at(std::size_t) const"),
            (
                "g::near(std::vector<g::P, std::allocator<g::P> > const&, g::P const&)",
                "g::near(const std::vector<P>&, const P&)",
            ),
            (
                "ekf::(anonymous namespace)::sq(double)",
                "ekf::(anonymous namespace)::sq(double)",
            ),
            ("ekf::M::msg[abi:cxx11](int) const", "ekf::M::msg(int) const"),
            (
                "double ekf::clamp<double>(double, double, double)",
                "ekf::clamp(double, double, double)",
            ),
            ("run(int, char**)", "run(int, char**)"),
        ];
        for (demangled, source) in pairs {
            assert_eq!(match_key(demangled), match_key(source), "{demangled} vs {source}");
        }
        assert_ne!(match_key("a::f(int)"), match_key("a::f(double)"));
        assert_ne!(match_key("a::f() const"), match_key("a::f()"));
    }

    fn coverage(entries: &[(&str, u32, u64)]) -> FileCoverage {
        let mut fc = FileCoverage::new("a.cpp");
        for (n, l, c) in entries {
            fc.function_hits.insert(n.to_string(), *c);
            fc.function_lines.insert(n.to_string(), *l);
        }
        fc
    }

    #[test]
    fn hit_and_zero_hit() {
        let unit = parse_unit(
            "a.cpp",
            "namespace a {\nint f(int x) { return x; }\nint g(int x) { return x; }\n}\n",
        );
        let records: Vec<&FunctionRecord> = unit.functions.iter().collect();
        let m = match_functions(&records, &coverage(&[("a::f(int)", 2, 3), ("a::g(int)", 3, 0)]));
        assert_eq!(m.hit("a::f(int)"), 3);
        assert!(m.is_covered("a::f(int)"));
        assert!(!m.is_covered("a::g(int)"));
        assert!(m.unmatched_entries.is_empty());
    }

    #[test]
    fn template_instances_fold_by_line() {
        let unit = parse_unit(
            "a.hpp",
            "template <typename T>\nT clamp(T v, T lo, T hi) { return v < lo ? lo : v; }\n",
        );
        let records: Vec<&FunctionRecord> = unit.functions.iter().collect();
        let m = match_functions(
            &records,
            &coverage(&[
                ("double clamp<double>(double, double, double)", 2, 1),
                ("int clamp<int>(int, int, int)", 2, 2),
                ("other()", 9, 1),
            ]),
        );
        assert_eq!(m.hit("clamp(T, T, T)"), 3);
        assert_eq!(m.unmatched_entries, vec!["other()"]);
    }

    #[test]
    fn missing_entries_are_reported() {
        let unit = parse_unit("a.cpp", "int f(int x) { return x; }\n");
        let records: Vec<&FunctionRecord> = unit.functions.iter().collect();
        let m = match_functions(&records, &FileCoverage::new("a.cpp"));
        assert_eq!(m.unmatched_records, vec!["f(int)"]);
        assert_eq!(m.hit("f(int)"), 0);
    }
}
