//! Package, function and line coverage rates per module.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::lcov::FileCoverage;
use super::matching::{match_functions, FunctionMatch};
use crate::error::{Error, Result};
use crate::integration::{discover_packages, PackageManifest, GENERATED_TEST_DIR};
use crate::percent::Ratio;
use crate::report::ReportTable;
use crate::source::{analyze_package, FunctionRecord, SourceUnit};

/// Packages plus the analysed units of a workspace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct WorkspaceModel {
    pub packages: Vec<PackageManifest>,
    pub units: Vec<SourceUnit>,
}

impl WorkspaceModel {
    /// Discover packages below `root` and analyse their sources. Generated
    /// test files are left out.
    pub fn load(root: &Path) -> Result<Self> {
        let packages = discover_packages(root)?;
        let mut units = Vec::new();
        for p in &packages {
            let generated = format!("{}/{}/", p.root, GENERATED_TEST_DIR);
            units.extend(
                analyze_package(root, &root.join(&p.root), &p.name)?
                    .into_iter()
                    .filter(|u| !u.path.starts_with(&generated)),
            );
        }
        Ok(Self { packages, units })
    }

    pub fn modules(&self) -> BTreeSet<String> {
        self.packages.iter().map(|p| p.module.clone()).collect()
    }

    pub fn package_of_path(&self, path: &str) -> Option<&PackageManifest> {
        self.packages
            .iter()
            .filter(|p| path.starts_with(&format!("{}/", p.root)))
            .max_by_key(|p| p.root.len())
    }

    pub fn units_of(&self, package: &str) -> impl Iterator<Item = &SourceUnit> {
        let package = package.to_string();
        self.units.iter().filter(move |u| u.package_name == package)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct CoverageMetrics {
    pub all_pkgs: u64,
    pub covered_pkgs: u64,
    pub funcs_in_covered_pkgs: u64,
    pub funcs_covered: u64,
    pub branched_funcs: u64,
    pub branched_funcs_covered: u64,
    pub lines_found: u64,
    pub lines_hit: u64,
    /// Lines inside covered functions that have branches.
    pub branch_lines_found: u64,
    pub branch_lines_hit: u64,
    pub pkgcov: f64,
    pub funccov: f64,
    pub funccov_branch: f64,
    pub linecov: f64,
    pub linecov_branch: f64,
}

impl CoverageMetrics {
    /// Derive every rate from raw counts.
    #[allow(clippy::too_many_arguments)]
    pub fn from_counts(
        all_pkgs: u64,
        covered_pkgs: u64,
        funcs_in_covered_pkgs: u64,
        funcs_covered: u64,
        branched_funcs: u64,
        branched_funcs_covered: u64,
        lines: (u64, u64),
        branch_lines: (u64, u64),
    ) -> Self {
        let mut m = Self {
            all_pkgs,
            covered_pkgs,
            funcs_in_covered_pkgs,
            funcs_covered,
            branched_funcs,
            branched_funcs_covered,
            lines_found: lines.0,
            lines_hit: lines.1,
            branch_lines_found: branch_lines.0,
            branch_lines_hit: branch_lines.1,
            pkgcov: 0.0,
            funccov: 0.0,
            funccov_branch: 0.0,
            linecov: 0.0,
            linecov_branch: 0.0,
        };
        m.refresh();
        m
    }

    fn refresh(&mut self) {
        self.pkgcov = self.pkgcov_ratio().percent();
        self.funccov = self.funccov_ratio().percent();
        self.funccov_branch = self.funccov_branch_ratio().percent();
        self.linecov = self.linecov_ratio().percent();
        self.linecov_branch = self.linecov_branch_ratio().percent();
    }

    pub fn pkgcov_ratio(&self) -> Ratio {
        Ratio::new(self.covered_pkgs, self.all_pkgs)
    }
    pub fn funccov_ratio(&self) -> Ratio {
        Ratio::new(self.funcs_covered, self.funcs_in_covered_pkgs)
    }
    pub fn funccov_branch_ratio(&self) -> Ratio {
        Ratio::new(self.branched_funcs_covered, self.branched_funcs)
    }
    pub fn linecov_ratio(&self) -> Ratio {
        Ratio::new(self.lines_hit, self.lines_found)
    }
    pub fn linecov_branch_ratio(&self) -> Ratio {
        Ratio::new(self.branch_lines_hit, self.branch_lines_found)
    }

    /// Sum of count columns, rates recomputed.
    pub fn add(&self, o: &CoverageMetrics) -> CoverageMetrics {
        CoverageMetrics::from_counts(
            self.all_pkgs + o.all_pkgs,
            self.covered_pkgs + o.covered_pkgs,
            self.funcs_in_covered_pkgs + o.funcs_in_covered_pkgs,
            self.funcs_covered + o.funcs_covered,
            self.branched_funcs + o.branched_funcs,
            self.branched_funcs_covered + o.branched_funcs_covered,
            (self.lines_found + o.lines_found, self.lines_hit + o.lines_hit),
            (
                self.branch_lines_found + o.branch_lines_found,
                self.branch_lines_hit + o.branch_lines_hit,
            ),
        )
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        if self.covered_pkgs > self.all_pkgs {
            return Err("covered_pkgs > all_pkgs".into());
        }
        if self.funcs_covered > self.funcs_in_covered_pkgs {
            return Err("funcs_covered > funcs_in_covered_pkgs".into());
        }
        if self.branched_funcs_covered > self.branched_funcs {
            return Err("branched_funcs_covered > branched_funcs".into());
        }
        if self.lines_hit > self.lines_found || self.branch_lines_hit > self.branch_lines_found {
            return Err("lines hit exceed lines found".into());
        }
        Ok(())
    }
}

/// Packages whose test sources executed at least one line.
pub fn executed_packages(model: &WorkspaceModel, coverage: &[FileCoverage]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for f in coverage.iter().filter(|f| f.lines_hit > 0) {
        for p in &model.packages {
            let test_dirs = [format!("{}/test/", p.root), format!("{}/tests/", p.root)];
            if test_dirs.iter().any(|d| f.source_path.starts_with(d)) {
                out.insert(p.name.clone());
            }
        }
    }
    out
}

/// Function matches per unit path for every unit that has coverage data.
pub fn match_workspace(model: &WorkspaceModel, coverage: &[FileCoverage]) -> BTreeMap<String, FunctionMatch> {
    let by_path: BTreeMap<&str, &FileCoverage> = coverage.iter().map(|f| (f.source_path.as_str(), f)).collect();
    let mut out = BTreeMap::new();
    for u in &model.units {
        let records: Vec<&FunctionRecord> = u.definitions().collect();
        let empty = FileCoverage::new(u.path.clone());
        let fc = by_path.get(u.path.as_str()).copied().unwrap_or(&empty);
        out.insert(u.path.clone(), match_functions(&records, fc));
    }
    out
}

/// Table-1 style metrics for one module.
///
/// Function and line counts only consider packages in `covered`. Line
/// counts only consider analysed product files, so test sources do not
/// inflate them.
pub fn compute_module_metrics(
    model: &WorkspaceModel,
    coverage: &[FileCoverage],
    covered: &BTreeSet<String>,
    module: &str,
) -> Result<CoverageMetrics> {
    if !model.modules().contains(module) {
        return Err(Error::UnknownModule(module.to_string()));
    }
    let matches = match_workspace(model, coverage);
    let by_path: BTreeMap<&str, &FileCoverage> = coverage.iter().map(|f| (f.source_path.as_str(), f)).collect();
    let pkgs: Vec<&PackageManifest> = model.packages.iter().filter(|p| p.module == module).collect();
    let covered_pkgs: Vec<&&PackageManifest> = pkgs.iter().filter(|p| covered.contains(&p.name)).collect();

    let (mut funcs, mut funcs_cov, mut br, mut br_cov) = (0, 0, 0, 0);
    let (mut lf, mut lh, mut blf, mut blh) = (0, 0, 0, 0);
    for p in &covered_pkgs {
        for u in model.units_of(&p.name) {
            let m = &matches[&u.path];
            let fc = by_path.get(u.path.as_str());
            if let Some(fc) = fc {
                lf += fc.lines_found;
                lh += fc.lines_hit;
            }
            for f in u.definitions() {
                let hit = m.is_covered(&f.qualified_name);
                funcs += 1;
                funcs_cov += hit as u64;
                if f.has_branches {
                    br += 1;
                    br_cov += hit as u64;
                    if let (true, Some(fc)) = (hit, fc) {
                        for c in fc.line_hits.range(f.line_span.start..=f.line_span.end).map(|(_, c)| c) {
                            blf += 1;
                            blh += (*c > 0) as u64;
                        }
                    }
                }
            }
        }
    }
    Ok(CoverageMetrics::from_counts(
        pkgs.len() as u64,
        covered_pkgs.len() as u64,
        funcs,
        funcs_cov,
        br,
        br_cov,
        (lf, lh),
        (blf, blh),
    ))
}

/// Rows for every module plus a `total` row summing the counts.
pub fn compute_all(
    model: &WorkspaceModel,
    coverage: &[FileCoverage],
    covered: &BTreeSet<String>,
) -> Result<Vec<(String, CoverageMetrics)>> {
    let mut rows = Vec::new();
    let mut total = CoverageMetrics::from_counts(0, 0, 0, 0, 0, 0, (0, 0), (0, 0));
    for module in model.modules() {
        let m = compute_module_metrics(model, coverage, covered, &module)?;
        total = total.add(&m);
        rows.push((module, m));
    }
    rows.push(("total".to_string(), total));
    Ok(rows)
}

pub const TABLE1_COLUMNS: [&str; 12] = [
    "Module",
    "all pkgs",
    "covered pkgs",
    "pkgcov(%)",
    "funcs in covered pkgs",
    "funcs covered",
    "funccov(%)",
    "branched funcs in covered pkgs",
    "branched func covered",
    "funccov_branch(%)",
    "linecov(%)",
    "linecov_branch(%)",
];

/// One table row in the column order of [`TABLE1_COLUMNS`].
pub fn table1_row(module: &str, m: &CoverageMetrics) -> Vec<String> {
    vec![
        module.to_string(),
        m.all_pkgs.to_string(),
        m.covered_pkgs.to_string(),
        m.pkgcov_ratio().to_string(),
        m.funcs_in_covered_pkgs.to_string(),
        m.funcs_covered.to_string(),
        m.funccov_ratio().to_string(),
        m.branched_funcs.to_string(),
        m.branched_funcs_covered.to_string(),
        m.funccov_branch_ratio().to_string(),
        m.linecov_ratio().to_string(),
        m.linecov_branch_ratio().to_string(),
    ]
}

pub fn render_table1(rows: &[(String, CoverageMetrics)]) -> ReportTable {
    let mut t = ReportTable::new("Coverage of official tests", &TABLE1_COLUMNS);
    for (module, m) in rows {
        t.rows.push(table1_row(module, m));
    }
    t.footnotes.push(
        "A package is covered when one of its test sources executed. Function and line rates count only covered packages."
            .into(),
    );
    t.footnotes
        .push("linecov_branch counts lines inside covered functions that contain branches.".into());
    t
}
