//! Where official tests leave product code unexecuted.

use std::collections::BTreeMap;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::lcov::FileCoverage;
use super::metrics::{match_workspace, WorkspaceModel};
use crate::source::{BlockKind, LineSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
pub enum UncoveredCategory {
    WholeFileUntested,
    AuxiliaryFunctionUntested,
    UncoveredIfBody,
    UncoveredCatchBlock,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct UncoveredFinding {
    pub category: UncoveredCategory,
    pub file: String,
    /// Absent exactly for [`UncoveredCategory::WholeFileUntested`].
    pub function: Option<String>,
    pub line_span: LineSpan,
    pub evidence: String,
}

/// Findings over every analysed unit that has coverage data, sorted by
/// file, then line, then category.
pub fn categorize_uncovered(model: &WorkspaceModel, coverage: &[FileCoverage]) -> Vec<UncoveredFinding> {
    let by_path: BTreeMap<&str, &FileCoverage> = coverage.iter().map(|f| (f.source_path.as_str(), f)).collect();
    let matches = match_workspace(model, coverage);
    let mut out = Vec::new();
    for unit in &model.units {
        let Some(fc) = by_path.get(unit.path.as_str()) else {
            continue;
        };
        if fc.lines_found > 0 && fc.lines_hit == 0 {
            out.push(UncoveredFinding {
                category: UncoveredCategory::WholeFileUntested,
                file: unit.path.clone(),
                function: None,
                line_span: LineSpan::new(1, unit.line_count.max(1)),
                evidence: format!("LF={} LH=0", fc.lines_found),
            });
            continue;
        }
        let m = &matches[&unit.path];
        let any_covered = unit.definitions().any(|f| m.is_covered(&f.qualified_name));
        for f in unit.definitions() {
            let hit = m.hit(&f.qualified_name);
            if hit == 0 {
                if any_covered {
                    out.push(UncoveredFinding {
                        category: UncoveredCategory::AuxiliaryFunctionUntested,
                        file: unit.path.clone(),
                        function: Some(f.qualified_name.clone()),
                        line_span: f.line_span,
                        evidence: format!("{} never called while other functions in the file ran", f.simple_name),
                    });
                }
                continue;
            }
            for b in &f.guarded_blocks {
                let lines: Vec<u64> = fc.line_hits.range(b.span.start..=b.span.end).map(|(_, c)| *c).collect();
                if lines.is_empty() || lines.iter().any(|c| *c > 0) {
                    continue;
                }
                let (category, what) = match b.kind {
                    BlockKind::IfBody => (UncoveredCategory::UncoveredIfBody, "if-body"),
                    BlockKind::CatchBody => (UncoveredCategory::UncoveredCatchBlock, "catch block"),
                };
                out.push(UncoveredFinding {
                    category,
                    file: unit.path.clone(),
                    function: Some(f.qualified_name.clone()),
                    line_span: b.span,
                    evidence: format!(
                        "{what} at lines {}-{}: {} instrumented lines, none executed",
                        b.span.start,
                        b.span.end,
                        lines.len()
                    ),
                });
            }
        }
    }
    out.sort_by(|a, b| (&a.file, a.line_span.start, a.category).cmp(&(&b.file, b.line_span.start, b.category)));
    out
}
