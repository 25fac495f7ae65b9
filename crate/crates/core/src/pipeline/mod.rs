//! The pipeline stages, each reading and writing files under `.awtest/`.
//!
//! `analyze` → `coverage` (optional) → `bench` → `gen` → `inject` → `run` →
//! `report`. Every stage checks that its inputs exist and names the stage to
//! run first when they do not.

pub mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::{
    build_benchmark, export_benchmark, import_benchmark, workspace_digest, Benchmark, BenchmarkEntry,
};
use crate::callgraph::{build_call_graph, callers_of, select_examples, CallGraph};
use crate::coverage::capture::{capture, relativize};
use crate::coverage::lcov::merge_by_path;
use crate::coverage::{
    categorize_uncovered, compute_all, executed_packages, parse_lcov, render_table1, write_lcov, FileCoverage,
    UncoveredFinding, WorkspaceModel,
};
use crate::error::{Error, Result};
use crate::fsutil::{read_json, write_atomic, write_json};
use crate::harness::{build_targets, run_tests, BuildErrorDetail, ClassifyContext, RuntimeClass};
use crate::integration::{
    discover_packages, inject_package, remove_package_injection, target_name, PackageManifest, TestRegistration,
    GENERATED_TEST_DIR,
};
use crate::llm::{
    extract_test_source, BackendKind, ChatRequest, ChatResponse, FinishReason, Gateway, GatewayError, LiveBackend,
    RetryPolicy, TranscriptStore,
};
use crate::prompt::{
    basic_prompt, build_awtest_prompt, build_basic_prompt, build_docgen_prompt, from_comment, header_lines,
    parse_doc_response, plan_prompt, signature_at_line, AwtestContext, DocOrigin, GeneratedDoc, PromptMode,
};
use crate::report::{
    compute_generation_metrics, render_generation_table, FocalOutcome, Format, GenerationMetrics, Grouping, ReportTable,
};
use crate::source::{FunctionRecord, SourceUnit};

pub use config::{BackendChoice, Dataset, PipelineConfig, CONFIG_FILE};

pub const STATE_DIR: &str = ".awtest";

/// What `gen` did for one focal function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub focal: String,
    pub package: String,
    pub module: String,
    pub target: String,
    pub mode: PromptMode,
    /// Package-relative path of the written test file.
    pub test_file: Option<String>,
    pub error: Option<String>,
    pub request_digest: Option<String>,
    pub doc_origin: Option<DocOrigin>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeSummary {
    pub packages: usize,
    pub units: usize,
    pub functions: usize,
    pub edges: usize,
    pub unparsed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub files: usize,
    pub lines_found: u64,
    pub lines_hit: u64,
    pub table: ReportTable,
    pub findings: Vec<UncoveredFinding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectSummary {
    pub packages: usize,
    pub targets: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanSummary {
    pub packages_restored: usize,
    pub test_files_removed: usize,
}

/// Index of hand-written responses for the scripted backend: focal
/// qualified name to response files relative to the index.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScriptIndex {
    pub tests: BTreeMap<String, String>,
    #[serde(default)]
    pub docs: BTreeMap<String, String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Purpose {
    Test,
    Doc,
}

enum Responder {
    Gateway(Gateway),
    Scripted {
        dir: PathBuf,
        index: ScriptIndex,
        store: TranscriptStore,
    },
}

impl Responder {
    fn complete(
        &self,
        req: &ChatRequest,
        focal: &str,
        purpose: Purpose,
    ) -> std::result::Result<ChatResponse, GatewayError> {
        match self {
            Responder::Gateway(g) => g.complete(req),
            Responder::Scripted { dir, index, store } => {
                let table = if purpose == Purpose::Test {
                    &index.tests
                } else {
                    &index.docs
                };
                let file = table
                    .get(focal)
                    .ok_or_else(|| GatewayError::Rejected(format!("no scripted response for `{focal}`")))?;
                let path = dir.join(file);
                let text =
                    fs::read_to_string(&path).map_err(|e| GatewayError::Store(format!("{}: {e}", path.display())))?;
                let resp = ChatResponse {
                    text,
                    finish_reason: FinishReason::Stop,
                    latency_ms: 0,
                    backend: BackendKind::Scripted,
                };
                store.save(req, &resp)?;
                Ok(resp)
            }
        }
    }
}

/// Configuration problems abort `gen`; anything else is recorded per focal.
fn is_fatal(e: &GatewayError) -> bool {
    matches!(
        e,
        GatewayError::ReplayMiss(_) | GatewayError::MissingKey(_) | GatewayError::Store(_)
    )
}

pub struct Pipeline {
    root: PathBuf,
    config: PipelineConfig,
}

impl Pipeline {
    pub fn new(root: &Path, config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let root = root.canonicalize().map_err(|e| Error::io(root, e))?;
        Ok(Self { root, config })
    }

    /// Open a workspace with the configuration found in it.
    pub fn open(root: &Path) -> Result<Self> {
        Self::new(root, PipelineConfig::load(root)?)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn state_dir(&self) -> PathBuf {
        self.root.join(STATE_DIR)
    }

    pub fn state_path(&self, name: &str) -> PathBuf {
        self.state_dir().join(name)
    }

    pub fn transcripts_dir(&self) -> PathBuf {
        PipelineConfig::resolve(&self.root, &self.config.transcripts)
    }

    fn require<T: for<'de> Deserialize<'de>>(&self, name: &str, stage: &str) -> Result<T> {
        let p = self.state_path(name);
        if !p.exists() {
            return Err(Error::MissingState(format!("{STATE_DIR}/{name}; run `awtest {stage}`")));
        }
        read_json(&p)
    }

    pub fn model(&self) -> Result<WorkspaceModel> {
        self.require("symbols.json", "analyze")
    }

    fn package_dir(&self, p: &PackageManifest) -> PathBuf {
        self.root.join(&p.root)
    }

    // ----- analyze ---------------------------------------------------------

    pub fn analyze(&self) -> Result<AnalyzeSummary> {
        let model = WorkspaceModel::load(&self.root)?;
        let graphs: Vec<CallGraph> = model
            .packages
            .par_iter()
            .map(|p| {
                let units: Vec<SourceUnit> = model.units_of(&p.name).cloned().collect();
                build_call_graph(&units)
            })
            .collect();
        write_json(&self.state_path("symbols.json"), &model)?;
        write_json(&self.state_path("callgraph.json"), &graphs)?;
        Ok(AnalyzeSummary {
            packages: model.packages.len(),
            units: model.units.len(),
            functions: model.units.iter().map(|u| u.definitions().count()).sum(),
            edges: graphs.iter().map(|g| g.edges.len()).sum(),
            unparsed: model
                .units
                .iter()
                .filter(|u| !u.parse_ok)
                .map(|u| u.path.clone())
                .collect(),
        })
    }

    // ----- coverage --------------------------------------------------------

    /// Read a tracefile and make its paths workspace-relative.
    pub fn read_tracefile(&self, path: &Path) -> Result<Vec<FileCoverage>> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut files = parse_lcov(&text)?;
        relativize(&mut files, &self.root);
        for f in &mut files {
            if let Some(rest) = f.source_path.strip_prefix("./") {
                f.source_path = rest.to_string();
            }
        }
        Ok(merge_by_path(files))
    }

    /// Ingest the official tests' tracefile: coverage table and uncovered code.
    pub fn coverage(&self, lcov: &Path) -> Result<CoverageSummary> {
        let model = self.model()?;
        let files = self.read_tracefile(lcov)?;
        let covered = executed_packages(&model, &files);
        let table = render_table1(&compute_all(&model, &files, &covered)?);
        let findings = categorize_uncovered(&model, &files);
        write_atomic(&self.state_path("official.info"), write_lcov(&files).as_bytes())?;
        write_json(&self.state_path("uncovered.json"), &findings)?;
        write_atomic(
            &self.state_path("reports/coverage.md"),
            table.render(Format::Markdown).as_bytes(),
        )?;
        let (lines_found, lines_hit) = crate::coverage::lcov::totals(&files);
        Ok(CoverageSummary {
            files: files.len(),
            lines_found,
            lines_hit,
            table,
            findings,
        })
    }

    // ----- bench -----------------------------------------------------------

    pub fn bench(&self, lcov: Option<&Path>) -> Result<Benchmark> {
        let model = self.model()?;
        let source = match (lcov, &self.config.official_lcov) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => PipelineConfig::resolve(&self.root, p),
            (None, None) => self.state_path("official.info"),
        };
        if !source.exists() {
            return Err(Error::MissingState(format!(
                "official coverage at {}; pass --lcov or run `awtest coverage`",
                source.display()
            )));
        }
        let files = self.read_tracefile(&source)?;
        let official: BTreeSet<String> = model
            .packages
            .iter()
            .filter(|p| p.has_official_tests)
            .map(|p| p.name.clone())
            .collect();
        let digest = workspace_digest(&self.root, &model)?;
        let bench = build_benchmark(&model, &files, &official, digest);
        export_benchmark(&bench, &self.state_path("benchmark.json"))?;
        Ok(bench)
    }

    fn benchmark(&self) -> Result<Benchmark> {
        let p = self.state_path("benchmark.json");
        if !p.exists() {
            return Err(Error::MissingState(format!(
                "{STATE_DIR}/benchmark.json; run `awtest bench`"
            )));
        }
        import_benchmark(&p)
    }

    pub fn dataset_entries<'a>(&self, bench: &'a Benchmark) -> Vec<&'a BenchmarkEntry> {
        match self.config.dataset {
            Dataset::Covered => bench.covered.iter().collect(),
            Dataset::Uncovered => bench.uncovered.iter().collect(),
            Dataset::All => bench.entries().collect(),
        }
    }

    // ----- gen -------------------------------------------------------------

    fn responder(&self) -> Result<Responder> {
        let store = TranscriptStore::new(self.transcripts_dir());
        let retry = RetryPolicy::default();
        let live = || -> Result<Box<dyn crate::llm::ChatBackend>> {
            Ok(Box::new(LiveBackend::from_env(self.config.live.clone())?))
        };
        Ok(match self.config.backend {
            BackendChoice::Replay => Responder::Gateway(Gateway::Replay { store }),
            BackendChoice::Live => Responder::Gateway(Gateway::Live {
                backend: live()?,
                retry,
            }),
            BackendChoice::Record => Responder::Gateway(Gateway::Record {
                backend: live()?,
                retry,
                store,
            }),
            BackendChoice::Scripted => {
                let dir =
                    PipelineConfig::resolve(&self.root, self.config.script_dir.as_deref().unwrap_or(Path::new(".")));
                let index: ScriptIndex = read_json(&dir.join("index.json"))?;
                Responder::Scripted { dir, index, store }
            }
        })
    }

    fn request(&self, system: &str, user: &str) -> ChatRequest {
        ChatRequest::new(
            &self.config.model,
            system,
            user,
            self.config.temperature,
            self.config.max_output_tokens,
        )
    }

    /// Developer documentation of the focal, from its definition or from a
    /// declaration elsewhere in the package.
    fn developer_doc(model: &WorkspaceModel, package: &str, focal: &FunctionRecord) -> Option<GeneratedDoc> {
        if let Some(d) = focal.doc.as_ref().and_then(from_comment) {
            return Some(d);
        }
        model
            .units_of(package)
            .flat_map(|u| u.functions.iter())
            .filter(|f| f.qualified_name == focal.qualified_name)
            .find_map(|f| f.doc.as_ref().and_then(from_comment))
    }

    #[allow(clippy::too_many_arguments)]
    fn awtest_context(
        &self,
        model: &WorkspaceModel,
        graphs: &[CallGraph],
        package: &PackageManifest,
        unit: &SourceUnit,
        focal: &FunctionRecord,
        file_text: &str,
        responder: &Responder,
    ) -> Result<AwtestContext> {
        let doc = match Self::developer_doc(model, &package.name, focal) {
            Some(d) => Some(d),
            None => {
                let b = build_docgen_prompt(focal, unit, file_text);
                fs::create_dir_all(self.state_path("prompts")).map_err(|e| Error::io(self.state_path("prompts"), e))?;
                write_json(
                    &self.state_path(&format!("prompts/{}.doc.json", target_name(&focal.qualified_name))),
                    &b,
                )?;
                match responder.complete(
                    &self.request(&b.system_text, &b.user_text),
                    &focal.qualified_name,
                    Purpose::Doc,
                ) {
                    Ok(r) => parse_doc_response(&r.text),
                    Err(e) if is_fatal(&e) => return Err(e.into()),
                    Err(e) => {
                        log::warn!("documentation for {}: {e}", focal.qualified_name);
                        None
                    }
                }
            }
        };
        let class = focal.class_name.as_ref().and_then(|_| {
            let scope = focal.scope_path();
            model
                .units_of(&package.name)
                .flat_map(|u| u.classes.iter())
                .find(|c| c.qualified_name == scope)
                .cloned()
        });
        let examples = match graphs.iter().find(|g| g.package == package.name) {
            Some(g) => {
                let callers: BTreeSet<String> = callers_of(g, &focal.qualified_name).into_iter().collect();
                let records: Vec<FunctionRecord> = model
                    .units_of(&package.name)
                    .flat_map(|u| u.definitions())
                    .filter(|f| f.qualified_name != focal.qualified_name && callers.contains(&f.qualified_name))
                    .cloned()
                    .collect();
                select_examples(&records, &focal.simple_name, self.config.k, self.config.budget)
            }
            None => Vec::new(),
        };
        let mut external_deps = package.internal_deps.clone();
        external_deps.extend(package.external_deps.iter().cloned());
        Ok(AwtestContext {
            namespace: focal.namespace(),
            class,
            headers: header_lines(unit),
            doc,
            external_deps,
            examples,
        })
    }

    fn generate_one(
        &self,
        entry: &BenchmarkEntry,
        model: &WorkspaceModel,
        graphs: &[CallGraph],
        responder: &Responder,
    ) -> Result<GenerationRecord> {
        let target = target_name(&entry.focal);
        let package = model.packages.iter().find(|p| p.name == entry.package);
        let unit = model.units.iter().find(|u| u.path == entry.file);
        let mut record = GenerationRecord {
            focal: entry.focal.clone(),
            package: entry.package.clone(),
            module: package.map_or_else(String::new, |p| p.module.clone()),
            target: target.clone(),
            mode: PromptMode::Basic,
            test_file: None,
            error: None,
            request_digest: None,
            doc_origin: None,
        };
        let (Some(package), Some(unit)) = (package, unit) else {
            record.error = Some("focal file is no longer in the source model".into());
            return Ok(record);
        };
        let path = self.root.join(&unit.path);
        let file_text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        record.mode = plan_prompt(unit.parse_ok, self.config.mode == PromptMode::Basic);
        let focal = unit.function(&entry.focal);
        let bundle = match (record.mode, focal) {
            (PromptMode::Awtest, Some(focal)) => {
                let ctx = self.awtest_context(model, graphs, package, unit, focal, &file_text, responder)?;
                record.doc_origin = ctx.doc.as_ref().map(|d| d.origin);
                build_awtest_prompt(focal, unit, &file_text, &ctx)
            }
            (_, Some(focal)) => build_basic_prompt(focal, unit, &file_text),
            // An unparsable file has no records; recover the signature from
            // the line the benchmark saw it on.
            (_, None) if !unit.parse_ok => basic_prompt(
                &entry.focal,
                &signature_at_line(&file_text, entry.line),
                &unit.path,
                &file_text,
            ),
            (_, None) => {
                record.error = Some("focal function is no longer in the source model".into());
                return Ok(record);
            }
        };
        write_json(&self.state_path(&format!("prompts/{target}.json")), &bundle)?;
        let req = self.request(&bundle.system_text, &bundle.user_text);
        record.request_digest = Some(req.request_digest.clone());
        let source = responder
            .complete(&req, &entry.focal, Purpose::Test)
            .and_then(|r| extract_test_source(&r.text));
        match source {
            Ok(src) => {
                let rel = format!("{GENERATED_TEST_DIR}/{target}.cpp");
                write_atomic(&self.package_dir(package).join(&rel), src.as_bytes())?;
                record.test_file = Some(rel);
            }
            Err(e) if is_fatal(&e) => return Err(e.into()),
            Err(e) => record.error = Some(e.to_string()),
        }
        Ok(record)
    }

    /// Prompt the model for every focal of the configured dataset and write
    /// the extracted test files into the packages.
    pub fn gen(&self) -> Result<Vec<GenerationRecord>> {
        let model = self.model()?;
        let graphs: Vec<CallGraph> = self.require("callgraph.json", "analyze")?;
        let bench = self.benchmark()?;
        if workspace_digest(&self.root, &model).ok().as_deref() != Some(bench.workspace_digest.as_str()) {
            log::warn!("sources changed since `bench`; the benchmark may be stale");
        }
        let entries = self.dataset_entries(&bench);
        let responder = self.responder()?;
        let packages: BTreeSet<&str> = entries.iter().map(|e| e.package.as_str()).collect();
        for p in model.packages.iter().filter(|p| packages.contains(p.name.as_str())) {
            remove_generated_tests(&self.package_dir(p))?;
        }
        let prompts = self.state_path("prompts");
        if prompts.exists() {
            fs::remove_dir_all(&prompts).map_err(|e| Error::io(&prompts, e))?;
        }
        fs::create_dir_all(&prompts).map_err(|e| Error::io(&prompts, e))?;
        let records = entries
            .par_iter()
            .map(|e| self.generate_one(e, &model, &graphs, &responder))
            .collect::<Result<Vec<_>>>()?;
        write_json(&self.state_path("generation.json"), &records)?;
        Ok(records)
    }

    // ----- inject ----------------------------------------------------------

    pub fn inject(&self) -> Result<InjectSummary> {
        let model = self.model()?;
        let records: Vec<GenerationRecord> = self.require("generation.json", "gen")?;
        let mut summary = InjectSummary {
            packages: 0,
            targets: 0,
        };
        for p in &model.packages {
            let regs: Vec<TestRegistration> = records
                .iter()
                .filter(|r| r.package == p.name)
                .filter_map(|r| {
                    Some(TestRegistration {
                        target_name: r.target.clone(),
                        test_file: r.test_file.clone()?,
                        linked_deps: p.library_targets.clone(),
                    })
                })
                .collect();
            if regs.is_empty() {
                remove_package_injection(&self.package_dir(p))?;
                continue;
            }
            inject_package(&self.package_dir(p), &regs)?;
            summary.packages += 1;
            summary.targets += regs.len();
        }
        Ok(summary)
    }

    // ----- run -------------------------------------------------------------

    /// Build every injected target from a fresh build directory, run the
    /// built ones case by case and capture their coverage.
    pub fn run(&self) -> Result<Vec<FocalOutcome>> {
        let model = self.model()?;
        let records: Vec<GenerationRecord> = self.require("generation.json", "gen")?;
        let ctx = ClassifyContext::from_units(&model.units);
        let mut outcomes: Vec<FocalOutcome> = records
            .iter()
            .map(|r| FocalOutcome {
                focal: r.focal.clone(),
                package: r.package.clone(),
                module: r.module.clone(),
                target: r.target.clone(),
                test_file: r.test_file.clone(),
                generation_error: r.error.clone(),
                build: None,
                cases: Vec::new(),
                run_error: None,
            })
            .collect();
        let mut coverage = Vec::new();
        let packages: BTreeSet<&str> = records
            .iter()
            .filter(|r| r.test_file.is_some())
            .map(|r| r.package.as_str())
            .collect();
        for name in packages {
            let p = model
                .packages
                .iter()
                .find(|p| p.name == name)
                .ok_or_else(|| Error::Invariant(format!("package `{name}` missing from the source model")))?;
            let dir = self.package_dir(p);
            let targets: Vec<String> = records
                .iter()
                .filter(|r| r.package == name && r.test_file.is_some())
                .map(|r| r.target.clone())
                .collect();
            let cmake =
                fs::read_to_string(dir.join("CMakeLists.txt")).map_err(|e| Error::io(dir.join("CMakeLists.txt"), e))?;
            if let Some(t) = targets.iter().find(|t| !cmake.contains(t.as_str())) {
                return Err(Error::MissingState(format!(
                    "target {t} is not registered in {name}; run `awtest inject`"
                )));
            }
            let build_dir = self.state_path(&format!("build/{name}"));
            if build_dir.exists() {
                fs::remove_dir_all(&build_dir).map_err(|e| Error::io(&build_dir, e))?;
            }
            let builds = build_targets(&self.config.harness, name, &dir, &build_dir, &targets, &ctx)?;
            let built: Vec<String> = builds.iter().filter(|b| b.built).map(|b| b.target.clone()).collect();
            let runs = run_tests(&self.config.harness, &dir, &build_dir, &built)?;
            for b in builds {
                if let Some(o) = outcomes.iter_mut().find(|o| o.target == b.target) {
                    o.build = Some(b);
                }
            }
            for r in runs {
                if let Some(o) = outcomes.iter_mut().find(|o| o.target == r.target) {
                    o.cases = r.outcomes;
                    o.run_error = r.error;
                }
            }
            let mut files = capture(&build_dir, &self.root)?;
            relativize(&mut files, &self.root);
            coverage.extend(files);
        }
        let coverage = merge_by_path(coverage);
        write_atomic(&self.state_path("generated.info"), write_lcov(&coverage).as_bytes())?;
        write_json(&self.state_path("outcomes.json"), &outcomes)?;
        Ok(outcomes)
    }

    // ----- report ----------------------------------------------------------

    pub fn report_tables(
        &self,
        grouping: Grouping,
        baseline: Option<&[GenerationMetrics]>,
    ) -> Result<(Vec<GenerationMetrics>, Vec<ReportTable>)> {
        let model = self.model()?;
        let outcomes: Vec<FocalOutcome> = self.require("outcomes.json", "run")?;
        let coverage = self.read_tracefile(&self.state_path("generated.info"))?;
        let metrics = compute_generation_metrics(&outcomes, &model, &coverage, grouping)?;
        let mode = match self.config.mode {
            PromptMode::Basic => "basic",
            _ => "awtest",
        };
        let dataset = match self.config.dataset {
            Dataset::Covered => "covered",
            Dataset::Uncovered => "uncovered",
            Dataset::All => "full",
        };
        let title = format!(
            "Generated tests ({mode} prompts, {dataset} dataset, {})",
            self.config.model
        );
        let tables = vec![
            render_generation_table(&title, &metrics, baseline),
            build_error_table(&outcomes),
            runtime_error_table(&outcomes),
        ];
        Ok((metrics, tables))
    }

    /// Render the report and write it, with the metrics, under `reports/`.
    pub fn report(&self, grouping: Grouping, format: Format, baseline: Option<&Path>) -> Result<String> {
        let base: Option<Vec<GenerationMetrics>> = baseline.map(read_json).transpose()?;
        let (metrics, tables) = self.report_tables(grouping, base.as_deref())?;
        let text = render_tables(&tables, format);
        let ext = match format {
            Format::Markdown => "md",
            Format::Csv => "csv",
            Format::Json => "json",
        };
        write_json(&self.state_path("reports/metrics.json"), &metrics)?;
        write_atomic(&self.state_path(&format!("reports/report.{ext}")), text.as_bytes())?;
        Ok(text)
    }

    // ----- clean -----------------------------------------------------------

    /// Remove injected registrations and generated test files. With
    /// `state`, also drop `.awtest/` except the transcript directory.
    pub fn clean(&self, state: bool) -> Result<CleanSummary> {
        let mut summary = CleanSummary {
            packages_restored: 0,
            test_files_removed: 0,
        };
        for p in discover_packages(&self.root)? {
            let dir = self.package_dir(&p);
            if remove_package_injection(&dir)? {
                summary.packages_restored += 1;
            }
            summary.test_files_removed += remove_generated_tests(&dir)?;
        }
        let state_dir = self.state_dir();
        if state && state_dir.exists() {
            let keep = self.transcripts_dir();
            for entry in fs::read_dir(&state_dir).map_err(|e| Error::io(&state_dir, e))? {
                let path = entry.map_err(|e| Error::io(&state_dir, e))?.path();
                if keep.starts_with(&path) {
                    continue;
                }
                let r = if path.is_dir() {
                    fs::remove_dir_all(&path)
                } else {
                    fs::remove_file(&path)
                };
                r.map_err(|e| Error::io(&path, e))?;
            }
        }
        Ok(summary)
    }
}

/// Delete the generated test directory of a package; returns the number of
/// files removed.
fn remove_generated_tests(package_dir: &Path) -> Result<usize> {
    let dir = package_dir.join(GENERATED_TEST_DIR);
    if !dir.exists() {
        return Ok(0);
    }
    let n = walkdir::WalkDir::new(&dir)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .count();
    fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(n)
}

/// Failed test files per build-error detail. A file counts once per detail.
pub fn build_error_table(outcomes: &[FocalOutcome]) -> ReportTable {
    let mut counts: BTreeMap<BuildErrorDetail, u64> = BTreeMap::new();
    for o in outcomes {
        if let Some(b) = o.build.as_ref().filter(|b| !b.built) {
            let details: BTreeSet<BuildErrorDetail> = b.error_classes.iter().map(|c| c.detail).collect();
            for d in details {
                *counts.entry(d).or_default() += 1;
            }
        }
    }
    let mut t = ReportTable::new("Build errors", &["Category", "Detail", "Count"]);
    for d in BuildErrorDetail::ALL {
        let n = counts.get(&d).copied().unwrap_or(0);
        t.rows.push(vec![
            format!("{:?}", d.category()),
            d.label().to_string(),
            n.to_string(),
        ]);
    }
    t.footnotes
        .push("Each failed test file counts once for every distinct error detail in its build log.".into());
    t
}

/// Failing test cases of built files per runtime error class.
pub fn runtime_error_table(outcomes: &[FocalOutcome]) -> ReportTable {
    let mut counts: BTreeMap<RuntimeClass, u64> = BTreeMap::new();
    for o in outcomes.iter().filter(|o| o.built()) {
        for c in &o.cases {
            if let Some(rc) = c.runtime_class {
                *counts.entry(rc).or_default() += 1;
            }
        }
    }
    let mut t = ReportTable::new("Runtime errors", &["Type", "Count"]);
    for rc in RuntimeClass::ALL {
        let label = match rc {
            RuntimeClass::AssertionError => "Assertion error",
            RuntimeClass::OutOfRange => "Runtime exception: out of range",
            RuntimeClass::InvalidArgument => "Runtime exception: invalid argument",
            RuntimeClass::OtherException => "Runtime exception: other",
            RuntimeClass::Timeout => "Timeout",
        };
        t.rows.push(vec![
            label.to_string(),
            counts.get(&rc).copied().unwrap_or(0).to_string(),
        ]);
    }
    t
}

/// Several tables in one document: blank-line separated for markdown and
/// csv, a JSON array otherwise.
pub fn render_tables(tables: &[ReportTable], format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(tables).unwrap_or_default();
            s.push('\n');
            s
        }
        _ => tables.iter().map(|t| t.render(format)).collect::<Vec<_>>().join("\n"),
    }
}
