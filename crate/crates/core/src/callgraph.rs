//! Per-package caller/callee graph and few-shot example mining.
//!
//! Calls are resolved by name only. A call site first tries the callee
//! spelling against every enclosing scope of the caller (innermost first);
//! if nothing matches it falls back to a unique match on the simple name
//! anywhere in the package. Overloads reached by name alone are ambiguous.
//! Member calls (`obj.f()`) carry no receiver type, so only the simple-name
//! rule applies to them.

use std::collections::{BTreeMap, BTreeSet};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::source::{FunctionRecord, SourceUnit};

pub const DEFAULT_K: usize = 2;
pub const DEFAULT_BUDGET: usize = 8000;

const ANON: &str = "(anonymous namespace)";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct CallGraph {
    pub package: String,
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
    pub unresolved_calls: Vec<UnresolvedCall>,
    /// Functions with an edge to themselves.
    pub recursive: BTreeSet<String>,
    /// Call sites that produced an edge (an edge may come from several sites).
    pub resolved_call_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum UnresolvedReason {
    /// Several package functions share the name.
    Ambiguous,
    /// No package function has the name.
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
pub struct UnresolvedCall {
    pub file: String,
    pub line: u32,
    pub caller: String,
    pub name: String,
    pub reason: UnresolvedReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct CallerExample {
    pub caller: String,
    pub snippet: String,
    pub call_site_line: u32,
    pub rank_key: usize,
}

/// Scope-qualified name with anonymous namespaces dropped, used for lookup.
fn lookup_key(f: &FunctionRecord) -> String {
    f.name_path()
        .split("::")
        .filter(|s| *s != ANON)
        .collect::<Vec<_>>()
        .join("::")
}

fn caller_scopes(f: &FunctionRecord) -> Vec<String> {
    let mut segments: Vec<String> = f
        .namespace_path
        .iter()
        .filter(|s| s.as_str() != ANON)
        .cloned()
        .collect();
    if let Some(c) = &f.class_name {
        segments.extend(c.split("::").map(str::to_string));
    }
    let mut scopes = Vec::new();
    for i in (0..=segments.len()).rev() {
        scopes.push(segments[..i].join("::"));
    }
    scopes
}

/// Name tables for one package.
struct Index {
    by_key: BTreeMap<String, BTreeSet<String>>,
    by_simple: BTreeMap<String, BTreeSet<String>>,
}

impl Index {
    fn new<'a>(records: impl Iterator<Item = &'a FunctionRecord>) -> Self {
        let mut by_key: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut by_simple: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for f in records {
            by_key
                .entry(lookup_key(f))
                .or_default()
                .insert(f.qualified_name.clone());
            by_simple
                .entry(f.simple_name.clone())
                .or_default()
                .insert(f.qualified_name.clone());
        }
        Self { by_key, by_simple }
    }

    fn resolve(&self, caller: &FunctionRecord, callee: &str, member: bool) -> Result<String, UnresolvedReason> {
        if !member {
            for scope in caller_scopes(caller) {
                let key = if scope.is_empty() {
                    callee.to_string()
                } else {
                    format!("{scope}::{callee}")
                };
                if let Some(found) = self.by_key.get(&key) {
                    return single(found);
                }
            }
        }
        let simple = callee.rsplit("::").next().unwrap_or(callee);
        match self.by_simple.get(simple) {
            Some(found) => single(found),
            None => Err(UnresolvedReason::External),
        }
    }
}

fn single(found: &BTreeSet<String>) -> Result<String, UnresolvedReason> {
    if found.len() == 1 {
        Ok(found.iter().next().cloned().unwrap_or_default())
    } else {
        Err(UnresolvedReason::Ambiguous)
    }
}

/// Build the call graph of one package. The result does not depend on the
/// order of `units`.
pub fn build_call_graph(units: &[SourceUnit]) -> CallGraph {
    let mut sorted: Vec<&SourceUnit> = units.iter().collect();
    sorted.sort_by(|a, b| a.path.cmp(&b.path));
    let records = || sorted.iter().flat_map(|u| u.functions.iter());
    let index = Index::new(records());
    let mut graph = CallGraph {
        package: sorted.first().map(|u| u.package_name.clone()).unwrap_or_default(),
        nodes: records().map(|f| f.qualified_name.clone()).collect(),
        ..CallGraph::default()
    };
    for unit in &sorted {
        for f in unit.definitions() {
            for site in &f.calls {
                match index.resolve(f, &site.callee, site.member) {
                    Ok(callee) => {
                        if callee == f.qualified_name {
                            graph.recursive.insert(callee.clone());
                        }
                        graph.edges.insert((f.qualified_name.clone(), callee));
                        graph.resolved_call_count += 1;
                    }
                    Err(reason) => graph.unresolved_calls.push(UnresolvedCall {
                        file: unit.path.clone(),
                        line: site.line,
                        caller: f.qualified_name.clone(),
                        name: site.callee.clone(),
                        reason,
                    }),
                }
            }
        }
    }
    graph.unresolved_calls.sort();
    graph
}

/// Callers of `focal` in lexicographic order. A focal unknown to the graph
/// yields an empty list and a warning.
pub fn callers_of(graph: &CallGraph, focal: &str) -> Vec<String> {
    if !graph.nodes.contains(focal) {
        log::warn!(
            "callers_of: `{focal}` is not a node of the `{}` call graph",
            graph.package
        );
        return Vec::new();
    }
    graph
        .edges
        .iter()
        .filter(|(_, callee)| callee == focal)
        .map(|(caller, _)| caller.clone())
        .collect()
}

/// Pick up to `k` caller bodies as usage examples, shortest first (ties by
/// caller name), stopping at the first one that would exceed `budget`
/// characters in total. Callers whose body never mentions `focal_simple`
/// in a call are skipped.
pub fn select_examples(callers: &[FunctionRecord], focal_simple: &str, k: usize, budget: usize) -> Vec<CallerExample> {
    let mut candidates: Vec<CallerExample> = callers
        .iter()
        .filter_map(|f| {
            let site = f
                .calls
                .iter()
                .find(|c| c.callee.rsplit("::").next() == Some(focal_simple))?;
            Some(CallerExample {
                caller: f.qualified_name.clone(),
                snippet: f.body_text.clone(),
                call_site_line: site.line,
                rank_key: f.body_text.chars().count(),
            })
        })
        .collect();
    candidates.sort_by(|a, b| (a.rank_key, &a.caller).cmp(&(b.rank_key, &b.caller)));
    let mut used = 0;
    let mut out = Vec::new();
    for c in candidates {
        if out.len() >= k || used + c.rank_key > budget {
            break;
        }
        used += c.rank_key;
        out.push(c);
    }
    out
}
