//! Build, run and coverage rates of generated tests.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::table::ReportTable;
use crate::coverage::{FileCoverage, WorkspaceModel};
use crate::error::{Error, Result};
use crate::harness::{BuildOutcome, TestRunOutcome};
use crate::percent::{format_delta, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    Module,
    Package,
}

impl FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "module" => Ok(Grouping::Module),
            "package" => Ok(Grouping::Package),
            other => Err(Error::UnknownGrouping(other.to_string())),
        }
    }
}

/// Everything that happened to one focal function's generated test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocalOutcome {
    pub focal: String,
    pub package: String,
    pub module: String,
    pub target: String,
    /// Package-relative test file; absent when generation failed.
    pub test_file: Option<String>,
    pub generation_error: Option<String>,
    pub build: Option<BuildOutcome>,
    pub cases: Vec<TestRunOutcome>,
    pub run_error: Option<String>,
}

impl FocalOutcome {
    pub fn built(&self) -> bool {
        self.build.as_ref().is_some_and(|b| b.built)
    }

    /// A file runs when at least one of its cases passed.
    pub fn runs(&self) -> bool {
        self.built() && self.cases.iter().any(TestRunOutcome::passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct GenerationMetrics {
    pub group: String,
    pub grouping: Grouping,
    pub functions: u64,
    pub built_files: u64,
    pub running_files: u64,
    pub built_test_cases: u64,
    pub errorless_cases: u64,
    pub lines_found: u64,
    pub lines_hit: u64,
    pub bs_file: f64,
    pub rs_file: f64,
    pub rs_case: f64,
    pub line_coverage: f64,
}

impl GenerationMetrics {
    pub fn bs_ratio(&self) -> Ratio {
        Ratio::new(self.built_files, self.functions)
    }
    pub fn rs_ratio(&self) -> Ratio {
        Ratio::new(self.running_files, self.functions)
    }
    pub fn rs_case_ratio(&self) -> Ratio {
        Ratio::new(self.errorless_cases, self.built_test_cases)
    }
    pub fn coverage_ratio(&self) -> Ratio {
        Ratio::new(self.lines_hit, self.lines_found)
    }
}

/// Share of built cases that ran without error. An empty denominator yields
/// `0/0`, which renders as 0.0 and earns a footnote.
pub fn compute_rs_case(errorless_cases: u64, built_cases: u64) -> Result<Ratio> {
    if errorless_cases > built_cases {
        return Err(Error::Invariant(format!(
            "{errorless_cases} errorless cases out of only {built_cases} built"
        )));
    }
    Ok(Ratio::new(errorless_cases, built_cases))
}

fn is_test_path(path: &str, pkg_root: &str) -> bool {
    let rest = path.strip_prefix(pkg_root).unwrap_or(path).trim_start_matches('/');
    rest.starts_with("test/") || rest.starts_with("tests/")
}

/// Lines of product sources in `packages`.
fn line_totals(model: &WorkspaceModel, coverage: &[FileCoverage], packages: &BTreeSet<&str>) -> (u64, u64) {
    let mut found = 0;
    let mut hit = 0;
    for f in coverage {
        let Some(p) = model.package_of_path(&f.source_path) else {
            continue;
        };
        if packages.contains(p.name.as_str()) && !is_test_path(&f.source_path, &p.root) {
            found += f.lines_found;
            hit += f.lines_hit;
        }
    }
    (found, hit)
}

fn group_metrics(
    group: &str,
    grouping: Grouping,
    outcomes: &[&FocalOutcome],
    model: &WorkspaceModel,
    coverage: &[FileCoverage],
) -> Result<GenerationMetrics> {
    let functions = outcomes.len() as u64;
    let built_files = outcomes.iter().filter(|o| o.built()).count() as u64;
    let running_files = outcomes.iter().filter(|o| o.runs()).count() as u64;
    let built_cases: Vec<&TestRunOutcome> = outcomes
        .iter()
        .filter(|o| o.built())
        .flat_map(|o| o.cases.iter())
        .collect();
    let built_test_cases = built_cases.len() as u64;
    let errorless_cases = built_cases.iter().filter(|c| c.passed()).count() as u64;
    let rs_case = compute_rs_case(errorless_cases, built_test_cases)?;
    let packages: BTreeSet<&str> = outcomes.iter().map(|o| o.package.as_str()).collect();
    let (lines_found, lines_hit) = line_totals(model, coverage, &packages);
    let m = GenerationMetrics {
        group: group.to_string(),
        grouping,
        functions,
        built_files,
        running_files,
        built_test_cases,
        errorless_cases,
        lines_found,
        lines_hit,
        bs_file: Ratio::new(built_files, functions).percent(),
        rs_file: Ratio::new(running_files, functions).percent(),
        rs_case: rs_case.percent(),
        line_coverage: Ratio::new(lines_hit, lines_found).percent(),
    };
    if m.rs_file > m.bs_file {
        return Err(Error::Invariant(format!("group {group}: RS_file above BS_file")));
    }
    Ok(m)
}

/// One row per module or package plus an `overall` row.
pub fn compute_generation_metrics(
    outcomes: &[FocalOutcome],
    model: &WorkspaceModel,
    coverage: &[FileCoverage],
    grouping: Grouping,
) -> Result<Vec<GenerationMetrics>> {
    let mut groups: BTreeMap<&str, Vec<&FocalOutcome>> = BTreeMap::new();
    for o in outcomes {
        let key = match grouping {
            Grouping::Module => o.module.as_str(),
            Grouping::Package => o.package.as_str(),
        };
        groups.entry(key).or_default().push(o);
    }
    let mut rows = groups
        .iter()
        .map(|(g, os)| group_metrics(g, grouping, os, model, coverage))
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<&FocalOutcome> = outcomes.iter().collect();
    rows.push(group_metrics("overall", grouping, &all, model, coverage)?);
    Ok(rows)
}

pub const GENERATION_COLUMNS: [&str; 7] = [
    "",
    "functions",
    "BS_file(%)",
    "RS_file(%)",
    "built test cases",
    "RS_case(%)",
    "line coverage(%)",
];

fn cell(r: Ratio, base: Option<Ratio>) -> String {
    match base {
        Some(b) => format!("{r}{}", format_delta(r.tenths() - b.tenths())),
        None => r.to_string(),
    }
}

/// Render generation metrics; with a baseline every rate cell gets a
/// `(+x.y)` suffix relative to the baseline row of the same group.
pub fn render_generation_table(
    title: &str,
    rows: &[GenerationMetrics],
    baseline: Option<&[GenerationMetrics]>,
) -> ReportTable {
    let grouping = rows.first().map_or(Grouping::Module, |r| r.grouping);
    let mut columns = GENERATION_COLUMNS;
    columns[0] = match grouping {
        Grouping::Module => "Module",
        Grouping::Package => "Package",
    };
    let mut t = ReportTable::new(title, &columns);
    let mut empty_groups = Vec::new();
    for r in rows {
        let base = baseline.and_then(|b| b.iter().find(|x| x.group == r.group));
        if r.built_test_cases == 0 {
            empty_groups.push(r.group.clone());
        }
        t.rows.push(vec![
            r.group.clone(),
            r.functions.to_string(),
            cell(r.bs_ratio(), base.map(GenerationMetrics::bs_ratio)),
            cell(r.rs_ratio(), base.map(GenerationMetrics::rs_ratio)),
            r.built_test_cases.to_string(),
            cell(r.rs_case_ratio(), base.map(GenerationMetrics::rs_case_ratio)),
            cell(r.coverage_ratio(), base.map(GenerationMetrics::coverage_ratio)),
        ]);
    }
    t.footnotes.push(
        "RS_file counts files with at least one passing case. RS_case divides passing cases by all cases of built files."
            .into(),
    );
    t.footnotes.push(
        "Line coverage is measured over the non-test sources of the packages holding the group's focal functions."
            .into(),
    );
    if !empty_groups.is_empty() {
        t.footnotes.push(format!(
            "No test case was built for: {}. RS_case is shown as 0.0.",
            empty_groups.join(", ")
        ));
    }
    if baseline.is_some() {
        t.footnotes
            .push("Bracketed values are changes against the baseline run.".into());
    }
    t
}
