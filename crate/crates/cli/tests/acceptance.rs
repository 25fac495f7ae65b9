//! Acceptance suite: one line per criterion.
//!
//! Every check compares the implementation against an oracle that lives in
//! this file (printed table values, hand-written manifests, token scanners,
//! grep resolution, the coverage tool's own summary). Criteria that need
//! cmake, g++ and gcovr report SKIP when those are missing.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use awtest_core::callgraph::{build_call_graph, callers_of};
use awtest_core::coverage::lcov::totals;
use awtest_core::coverage::{categorize_uncovered, parse_lcov, CoverageMetrics, WorkspaceModel};
use awtest_core::harness::{
    classify_build_error, classify_runtime_error, BuildErrorDetail, ClassifyContext, RuntimeClass,
};
use awtest_core::integration::{inject_tests, remove_injection, TestRegistration};
use awtest_core::report::compute_rs_case;
use awtest_core::source::{Access, FunctionRecord, MemberKind};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use regex::Regex;
use serde::Deserialize;
use serde_json::Value;

/// Criteria allowed to fail without failing the target. Each one is
/// explained in the README.
const KNOWN_FAILURES: &[u32] = &[1];

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Verdict;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .canonicalize()
        .unwrap()
}

fn read_json<T: for<'de> Deserialize<'de>>(p: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn tools_missing(tools: &[&str]) -> Option<String> {
    let missing: Vec<&str> = tools
        .iter()
        .copied()
        .filter(|t| Command::new(t).arg("--version").output().is_err())
        .collect();
    (!missing.is_empty()).then(|| format!("needs {}", missing.join(", ")))
}

// ----- 1: Table 1 from its count columns -----------------------------------

/// Printed rows: counts, then pkgcov, funccov, funccov_branch, linecov,
/// linecov_branch.
const TABLE1: [(&str, [u64; 6], [f64; 5]); 9] = [
    ("common", [44, 14, 451, 296, 169, 123], [31.8, 65.6, 72.8, 61.5, 94.6]),
    ("control", [13, 5, 204, 149, 97, 78], [38.5, 73.0, 80.4, 64.5, 85.6]),
    ("evaluator", [4, 4, 49, 46, 27, 26], [100.0, 94.0, 96.3, 86.4, 93.8]),
    ("localization", [9, 3, 56, 23, 17, 6], [33.3, 41.1, 35.3, 19.5, 77.8]),
    ("map", [4, 2, 29, 5, 14, 4], [50.0, 17.2, 28.6, 11.7, 86.0]),
    ("planning", [21, 8, 1313, 210, 766, 125], [38.1, 16.0, 16.3, 7.3, 90.8]),
    ("simulator", [3, 3, 74, 53, 23, 15], [100.0, 71.6, 65.2, 75.5, 91.4]),
    ("vehicle", [5, 1, 30, 21, 16, 13], [20.0, 70.0, 81.3, 47.2, 94.7]),
    ("total", [103, 40, 2206, 803, 1129, 390], [38.8, 36.4, 34.5, 17.7, 89.4]),
];

fn criterion_1() -> Verdict {
    let mut bad = Vec::new();
    let mut checked = 0;
    for (row, c, printed) in TABLE1 {
        let m = CoverageMetrics::from_counts(c[0], c[1], c[2], c[3], c[4], c[5], (0, 0), (0, 0));
        for (name, got, want) in [
            ("pkgcov", m.pkgcov, printed[0]),
            ("funccov", m.funccov, printed[1]),
            ("funccov_branch", m.funccov_branch, printed[2]),
        ] {
            checked += 1;
            if (got - want).abs() > 0.05 {
                bad.push(format!("{row}.{name} {got:.3} vs printed {want}"));
            }
        }
    }
    let note = "linecov columns have no printed line counts and are not re-derivable";
    if bad.is_empty() {
        Verdict::Pass(format!("{checked} cells within 0.05; {note}"))
    } else {
        Verdict::Fail(format!(
            "{} of {checked} cells off: {}; {note}",
            bad.len(),
            bad.join(", ")
        ))
    }
}

// ----- 2: RS_case against Table 2 ------------------------------------------

fn criterion_2() -> Verdict {
    let rows = [("map", 10u64, 50.0), ("localization (GPT-4o-mini)", 9, 100.0)];
    let mut found = Vec::new();
    for (row, built, printed) in rows {
        let hits: Vec<u64> = (0..=built)
            .filter(|&e| (compute_rs_case(e, built).unwrap().percent() - printed).abs() <= 0.05)
            .collect();
        match hits.as_slice() {
            [e] => found.push(format!("{row}: {e}/{built}")),
            _ => return Verdict::Fail(format!("{row}: {built} built cases cannot give {printed}")),
        }
    }
    Verdict::Pass(found.join(", "))
}

// ----- 3: source extraction vs manifest and token scanner -----------------

#[derive(Deserialize)]
struct ManifestFn {
    qualified_name: String,
    simple_name: String,
    lines: [u32; 2],
    branch_count: u32,
    param_count: u32,
    documented: bool,
    access: String,
}

#[derive(Deserialize)]
struct Manifest {
    files: BTreeMap<String, Vec<ManifestFn>>,
}

/// Source with comments, string and character literals blanked out, keeping
/// line structure.
fn strip_code(text: &str) -> String {
    let b = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        let next = b.get(i + 1).map(|&x| x as char);
        if c == '/' && next == Some('/') {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else if c == '/' && next == Some('*') {
            i += 2;
            while i + 1 < b.len() && !(b[i] == b'*' && b[i + 1] == b'/') {
                if b[i] == b'\n' {
                    out.push('\n');
                }
                i += 1;
            }
            i += 2;
        } else if c == '"' || c == '\'' {
            out.push(' ');
            i += 1;
            while i < b.len() && b[i] as char != c {
                if b[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            i += 1;
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

fn lines_of(text: &str, span: [u32; 2]) -> String {
    text.lines()
        .skip(span[0] as usize - 1)
        .take((span[1] - span[0] + 1) as usize)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Branch constructs by keyword: if, for, while (a do-while has exactly
/// one), case, catch, and the `?` of a conditional.
fn scan_branches(code: &str) -> u32 {
    let words = Regex::new(r"\b(if|for|while|case|catch)\b").unwrap();
    (words.find_iter(code).count() + code.matches('?').count()) as u32
}

fn access_name(f: &FunctionRecord) -> &'static str {
    match f.access {
        Access::Public => "public",
        Access::Protected => "protected",
        Access::Private => "private",
        Access::Free => "free",
    }
}

fn criterion_3() -> Verdict {
    let root = fixtures().join("workspace");
    let manifest: Manifest = read_json(&fixtures().join("manifests/functions.json"));
    let model = WorkspaceModel::load(&root).unwrap();
    let mut mismatches = Vec::new();
    let mut total = 0;
    let units: BTreeSet<&str> = model.units.iter().map(|u| u.path.as_str()).collect();
    let listed: BTreeSet<&str> = manifest.files.keys().map(String::as_str).collect();
    if units != listed {
        mismatches.push(format!("file sets differ: {units:?} vs {listed:?}"));
    }
    for (path, expected) in &manifest.files {
        let Some(unit) = model.units.iter().find(|u| &u.path == path) else {
            continue;
        };
        let text = std::fs::read_to_string(root.join(path)).unwrap();
        let got: Vec<&FunctionRecord> = unit.definitions().collect();
        if got.len() != expected.len() {
            mismatches.push(format!(
                "{path}: {} definitions, manifest lists {}",
                got.len(),
                expected.len()
            ));
        }
        for (g, e) in got.iter().zip(expected) {
            total += 1;
            let fields = [
                ("qualified_name", g.qualified_name.clone(), e.qualified_name.clone()),
                ("simple_name", g.simple_name.clone(), e.simple_name.clone()),
                (
                    "lines",
                    format!("{:?}", [g.line_span.start, g.line_span.end]),
                    format!("{:?}", e.lines),
                ),
                ("branch_count", g.branch_count.to_string(), e.branch_count.to_string()),
                ("param_count", g.params.len().to_string(), e.param_count.to_string()),
                ("documented", g.doc.is_some().to_string(), e.documented.to_string()),
                ("access", access_name(g).to_string(), e.access.clone()),
            ];
            for (name, got, want) in fields {
                if got != want {
                    mismatches.push(format!("{}: {name} {got} vs {want}", e.qualified_name));
                }
            }
            let scanned = scan_branches(&strip_code(&lines_of(&text, e.lines)));
            if scanned != g.branch_count {
                mismatches.push(format!(
                    "{}: token scanner counts {scanned}, extractor {}",
                    e.qualified_name, g.branch_count
                ));
            }
        }
    }
    if mismatches.is_empty() {
        Verdict::Pass(format!("{total} functions match the manifest and the token scanner"))
    } else {
        Verdict::Fail(mismatches.join("; "))
    }
}

// ----- 4: call graph vs grep resolution ------------------------------------

const NOT_CALLS: &[&str] = &[
    "if",
    "for",
    "while",
    "switch",
    "return",
    "catch",
    "sizeof",
    "static_cast",
    "const_cast",
    "reinterpret_cast",
    "dynamic_cast",
    "decltype",
    "alignof",
    "noexcept",
    "throw",
];

/// Edges found by scanning every definition body for `name(` or
/// `name<...>(` and keeping names that match exactly one function of the
/// package.
fn grep_edges(root: &Path, model: &WorkspaceModel, package: &str) -> BTreeSet<(String, String)> {
    let call = Regex::new(r"([A-Za-z_]\w*)\s*(?:<[^;(){}]*>)?\s*\(").unwrap();
    let mut by_simple: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for f in model.units_of(package).flat_map(|u| u.functions.iter()) {
        by_simple.entry(&f.simple_name).or_default().insert(&f.qualified_name);
    }
    let mut edges = BTreeSet::new();
    for u in model.units_of(package) {
        let text = std::fs::read_to_string(root.join(&u.path)).unwrap();
        for f in u.definitions() {
            let code = strip_code(&lines_of(&text, [f.line_span.start, f.line_span.end]));
            // The body starts at the first brace; initializer lists and the
            // declarator are not calls.
            let body = code.find('{').map_or("", |i| &code[i..]);
            let body = if f.member_kind == MemberKind::Constructor {
                skip_init_braces(body)
            } else {
                body
            };
            for cap in call.captures_iter(body) {
                let name = cap.get(1).unwrap().as_str();
                if NOT_CALLS.contains(&name) {
                    continue;
                }
                if let Some(targets) = by_simple.get(name).filter(|t| t.len() == 1) {
                    edges.insert((f.qualified_name.clone(), targets.iter().next().unwrap().to_string()));
                }
            }
        }
    }
    edges
}

/// Constructor text from the first brace may still be a brace initializer
/// (`state_{...}`); the body is the last top-level brace block.
fn skip_init_braces(body: &str) -> &str {
    body.rfind("\n{").map_or(body, |i| &body[i..])
}

fn criterion_4() -> Verdict {
    let root = fixtures().join("workspace");
    let model = WorkspaceModel::load(&root).unwrap();
    let mut problems = Vec::new();
    let mut n_edges = 0;
    for p in &model.packages {
        let units: Vec<_> = model.units_of(&p.name).cloned().collect();
        let g = build_call_graph(&units);
        let oracle = grep_edges(&root, &model, &p.name);
        n_edges += g.edges.len();
        for e in g.edges.difference(&oracle) {
            problems.push(format!("{}: extra edge {} -> {}", p.name, e.0, e.1));
        }
        for e in oracle.difference(&g.edges) {
            problems.push(format!("{}: missing edge {} -> {}", p.name, e.0, e.1));
        }
        for n in &g.nodes {
            let transpose: Vec<String> = oracle.iter().filter(|(_, c)| c == n).map(|(a, _)| a.clone()).collect();
            if callers_of(&g, n) != transpose {
                problems.push(format!("{}: callers_of({n}) differs from the transpose", p.name));
            }
        }
    }
    if problems.is_empty() {
        Verdict::Pass(format!(
            "{n_edges} edges match grep resolution; callers_of is the transpose"
        ))
    } else {
        Verdict::Fail(problems.join("; "))
    }
}

// ----- 5: lcov round trip and planted findings -----------------------------

/// `(hit, found)` from a gcovr summary line `lines: 47.1% (120 out of 255)`.
fn gcovr_lines(summary: &str) -> Option<(u64, u64)> {
    let re = Regex::new(r"lines: [\d.]+% \((\d+) out of (\d+)\)").unwrap();
    let c = re.captures(summary)?;
    Some((c[1].parse().ok()?, c[2].parse().ok()?))
}

fn run_ok(cmd: &mut Command) -> Result<Output, String> {
    let out = cmd.output().map_err(|e| format!("{cmd:?}: {e}"))?;
    if out.status.success() {
        Ok(out)
    } else {
        Err(format!("{cmd:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

/// Build the fixture packages with coverage, run their tests and compare
/// our parse of gcovr's tracefile with gcovr's own summary.
fn live_round_trip() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ws = fixtures().join("workspace");
    for pkg in [
        "src/common/geometry_utils",
        "src/localization/ekf_localizer",
        "src/map/map_loader",
    ] {
        let b = tmp.path().join(Path::new(pkg).file_name().unwrap());
        run_ok(
            Command::new("cmake")
                .arg("-S")
                .arg(ws.join(pkg))
                .arg("-B")
                .arg(&b)
                .args([
                    "-DBUILD_TESTING=ON",
                    "-DCMAKE_BUILD_TYPE=Debug",
                    "-DCMAKE_CXX_FLAGS=--coverage -O0",
                ]),
        )?;
        run_ok(Command::new("cmake").arg("--build").arg(&b))?;
        // Test failures still leave counters behind.
        let _ = Command::new("ctest").current_dir(&b).output();
    }
    let info = tmp.path().join("official.info");
    let out = run_ok(
        Command::new("gcovr")
            .arg("-r")
            .arg(&ws)
            .arg(tmp.path())
            .arg("--lcov")
            .arg(&info)
            .arg("--print-summary"),
    )?;
    let (hit, found) = gcovr_lines(&String::from_utf8_lossy(&out.stdout)).ok_or("no gcovr summary line")?;
    let parsed = parse_lcov(&std::fs::read_to_string(&info).unwrap()).map_err(|e| e.to_string())?;
    let (lf, lh) = totals(&parsed);
    if (lf, lh) == (found, hit) {
        Ok(format!("fresh build LF {lf} LH {lh}"))
    } else {
        Err(format!("fresh build parsed LF {lf} LH {lh}, gcovr says {found}/{hit}"))
    }
}

#[derive(Deserialize)]
struct Planted {
    findings: Vec<PlantedFinding>,
}

#[derive(Deserialize)]
struct PlantedFinding {
    category: String,
    file: String,
    function: Option<String>,
}

fn criterion_5() -> Verdict {
    let cov = fixtures().join("coverage");
    let committed = parse_lcov(&std::fs::read_to_string(cov.join("official.info")).unwrap()).unwrap();
    let (lf, lh) = totals(&committed);
    let Some((hit, found)) = gcovr_lines(&std::fs::read_to_string(cov.join("summary.txt")).unwrap()) else {
        return Verdict::Fail("summary.txt has no lines entry".into());
    };
    if (lf, lh) != (found, hit) {
        return Verdict::Fail(format!(
            "committed tracefile LF {lf} LH {lh}, gcovr summary {found}/{hit}"
        ));
    }

    let model = WorkspaceModel::load(&fixtures().join("workspace")).unwrap();
    let findings = categorize_uncovered(&model, &committed);
    let got: BTreeSet<(String, String, Option<String>)> = findings
        .iter()
        .map(|f| (format!("{:?}", f.category), f.file.clone(), f.function.clone()))
        .collect();
    let planted: Planted = read_json(&cov.join("planted.json"));
    let categories: BTreeSet<&str> = got.iter().map(|g| g.0.as_str()).collect();
    let planted_categories: BTreeSet<&str> = planted.findings.iter().map(|p| p.category.as_str()).collect();
    if categories != planted_categories || categories.len() != 4 {
        return Verdict::Fail(format!("categories {categories:?}, planted {planted_categories:?}"));
    }
    for p in &planted.findings {
        if !got.contains(&(p.category.clone(), p.file.clone(), p.function.clone())) {
            return Verdict::Fail(format!("planted {} in {} not reported", p.category, p.file));
        }
    }
    let mut detail = format!("committed LF {lf} LH {lh} equal gcovr; 4 planted categories found");
    match tools_missing(&["cmake", "g++", "gcovr", "ctest"]) {
        Some(why) => detail.push_str(&format!("; fresh build skipped ({why})")),
        None => match live_round_trip() {
            Ok(s) => detail.push_str(&format!("; {s}")),
            Err(e) => return Verdict::Fail(e),
        },
    }
    Verdict::Pass(detail)
}

// ----- 6: classifier corpus -------------------------------------------------

#[derive(Deserialize)]
struct BuildLabel {
    log: String,
    details: Vec<BuildErrorDetail>,
}

#[derive(Deserialize)]
struct RuntimeLabel {
    log: String,
    timed_out: bool,
    class: RuntimeClass,
}

fn criterion_6() -> Verdict {
    let corpus = fixtures().join("corpus");
    let model = WorkspaceModel::load(&fixtures().join("workspace")).unwrap();
    let ctx = ClassifyContext::from_units(&model.units);
    let build: Vec<BuildLabel> = read_json(&corpus.join("build/labels.json"));
    let mut wrong = Vec::new();
    let mut details = BTreeSet::new();
    for l in &build {
        let text = std::fs::read_to_string(corpus.join("build/logs").join(&l.log)).unwrap();
        let got: Vec<BuildErrorDetail> = classify_build_error(&text, &ctx)
            .into_iter()
            .map(|c| c.detail)
            .collect();
        details.extend(l.details.iter().copied());
        if got != l.details {
            wrong.push(format!("{}: {got:?} vs {:?}", l.log, l.details));
        }
    }
    let runtime: Vec<RuntimeLabel> = read_json(&corpus.join("runtime/labels.json"));
    let mut classes = BTreeSet::new();
    for l in &runtime {
        let text = std::fs::read_to_string(corpus.join("runtime/logs").join(&l.log)).unwrap();
        classes.insert(l.class);
        let got = classify_runtime_error(&text, l.timed_out);
        if got != l.class {
            wrong.push(format!("{}: {got:?} vs {:?}", l.log, l.class));
        }
    }
    let labelled: BTreeSet<_> = details.iter().filter(|d| **d != BuildErrorDetail::Other).collect();
    if build.len() < 15 || labelled.len() < 12 || runtime.len() < 6 || classes.len() < RuntimeClass::ALL.len() {
        return Verdict::Fail(format!(
            "corpus too small: {} build logs over {} details, {} runtime logs over {} classes",
            build.len(),
            labelled.len(),
            runtime.len(),
            classes.len()
        ));
    }
    if wrong.is_empty() {
        Verdict::Pass(format!(
            "{}/{} build logs ({} details) and {}/{} runtime logs ({} classes) agree",
            build.len(),
            build.len(),
            details.len(),
            runtime.len(),
            runtime.len(),
            classes.len()
        ))
    } else {
        Verdict::Fail(wrong.join("; "))
    }
}

// ----- 7: injection laws ----------------------------------------------------

fn cmake_text() -> impl Strategy<Value = String> {
    let style = prop_oneof![
        Just(""),
        Just("ament_add_gtest(test_old test/test_old.cpp)"),
        Just("ament_auto_add_gtest(test_old test/test_old.cpp)"),
        Just("catkin_add_gtest(test_old test/test_old.cpp)"),
        Just("add_executable(test_old test/test_old.cpp)\ngtest_discover_tests(test_old)"),
        Just("add_executable(test_old test/test_old.cpp)\nadd_test(NAME test_old COMMAND test_old)"),
    ];
    let guard = prop_oneof![
        Just(None),
        Just(Some("BUILD_TESTING")),
        Just(Some("CATKIN_ENABLE_TESTING"))
    ];
    let noise = prop::collection::vec(
        prop_oneof![
            Just("".to_string()),
            "[a-z ]{0,20}".prop_map(|s| format!("# {s}")),
            "[a-z_]{1,8}".prop_map(|s| format!("set({} ON)", s.to_uppercase())),
            "[a-z_]{1,8}".prop_map(|s| format!("message(STATUS \"{s}\")")),
        ],
        0..4,
    );
    (
        style,
        guard,
        noise.clone(),
        noise,
        0..3usize,
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(style, guard, before, after, indent, trailing_newline, crlf)| {
            let pad = "  ".repeat(indent);
            let mut lines = vec![
                "cmake_minimum_required(VERSION 3.14)".to_string(),
                "project(pkg CXX)".to_string(),
            ];
            lines.extend(before);
            lines.push("add_library(pkg src/pkg.cpp)".into());
            match guard {
                Some(g) => {
                    lines.push(format!("if({g})"));
                    lines.extend(style.lines().filter(|l| !l.is_empty()).map(|l| format!("{pad}  {l}")));
                    lines.push("endif()".into());
                }
                None => lines.extend(style.lines().map(String::from)),
            }
            lines.extend(after);
            let nl = if crlf { "\r\n" } else { "\n" };
            let mut text = lines.join(nl);
            if trailing_newline {
                text.push_str(nl);
            }
            text
        })
}

fn registrations() -> impl Strategy<Value = Vec<TestRegistration>> {
    prop::collection::btree_set("[a-z][a-z0-9_]{0,10}", 1..4).prop_map(|names| {
        names
            .into_iter()
            .map(|n| TestRegistration {
                target_name: format!("awtest_{n}"),
                test_file: format!("test/awtest/awtest_{n}.cpp"),
                linked_deps: vec!["pkg".into()],
            })
            .collect()
    })
}

fn criterion_7() -> Verdict {
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(
        &(cmake_text(), registrations(), registrations()),
        |(text, regs, other)| {
            let once = inject_tests(&text, &regs).unwrap();
            prop_assert_eq!(&inject_tests(&once, &regs).unwrap(), &once, "inject is not idempotent");
            prop_assert_eq!(&remove_injection(&once).unwrap(), &text, "remove(inject(t)) != t");
            let replaced = inject_tests(&once, &other).unwrap();
            prop_assert_eq!(&remove_injection(&replaced).unwrap(), &text, "re-injection leaks");
            Ok(())
        },
    );
    match result {
        Ok(()) => Verdict::Pass("idempotence and remove∘inject = id on 100 generated CMakeLists".into()),
        Err(e) => Verdict::Fail(e.to_string()),
    }
}

// ----- 8: end-to-end determinism and golden metrics -----------------------

fn awtest(root: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_awtest"))
        .arg("-C")
        .arg(root)
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!(
            "awtest {} exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn fixture_copy(config: &Value) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in walkdir::WalkDir::new(fixtures().join("workspace")) {
        let entry = entry.unwrap();
        let rel = entry.path().strip_prefix(fixtures().join("workspace")).unwrap();
        let dest = dir.path().join(rel);
        if entry.file_type().is_dir() {
            std::fs::create_dir_all(&dest).unwrap();
        } else {
            std::fs::copy(entry.path(), &dest).unwrap();
        }
    }
    std::fs::write(
        dir.path().join("awtest.json"),
        serde_json::to_string_pretty(config).unwrap(),
    )
    .unwrap();
    dir
}

fn pipeline(root: &Path) -> Result<String, String> {
    let lcov = fixtures().join("coverage/official.info");
    awtest(root, &["analyze"])?;
    awtest(root, &["bench", "--lcov", lcov.to_str().unwrap()])?;
    awtest(root, &["gen"])?;
    awtest(root, &["inject"])?;
    awtest(root, &["run"])?;
    awtest(root, &["report", "--format", "md"])
}

/// Hand-computed from the scripted responses: per group functions, built
/// files, running files, built cases, passing cases, and the product-line
/// totals that gcovr reports for the generated-test run.
const GOLDEN: [(&str, [u64; 5], (u64, u64)); 3] = [
    ("common", [2, 2, 2, 5, 3], (19, 38)),
    ("localization", [8, 5, 4, 9, 6], (50, 124)),
    ("overall", [10, 7, 6, 14, 9], (69, 162)),
];

fn pct(n: u64, d: u64) -> String {
    // Half-up to one decimal, in integer arithmetic.
    let tenths = (n * 2000 + d) / (2 * d);
    format!("{}.{}", tenths / 10, tenths % 10)
}

fn report_rows(report: &str) -> BTreeMap<String, Vec<String>> {
    report
        .lines()
        .take_while(|l| !l.starts_with("## Build errors"))
        .filter(|l| l.starts_with("| ") && !l.starts_with("| Module"))
        .map(|l| {
            let cells: Vec<String> = l.trim_matches('|').split('|').map(|c| c.trim().to_string()).collect();
            (cells[0].clone(), cells[1..].to_vec())
        })
        .collect()
}

fn criterion_8() -> Verdict {
    if let Some(why) = tools_missing(&["cmake", "g++"]) {
        return Verdict::Skip(why);
    }
    let config = serde_json::json!({
        "backend": "replay",
        "transcripts": fixtures().join("llm/transcripts"),
        "harness": {"test_timeout_s": 2},
    });
    let ws = fixture_copy(&config);
    let first = match pipeline(ws.path()) {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(e),
    };
    let second = match pipeline(ws.path()) {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(e),
    };
    if first != second {
        return Verdict::Fail("two consecutive runs produced different reports".into());
    }
    let golden_file = std::fs::read_to_string(fixtures().join("golden/report.md")).unwrap();
    if first != golden_file {
        return Verdict::Fail("report differs from fixtures/golden/report.md".into());
    }
    let rows = report_rows(&first);
    for (group, [f, built, runs, cases, passed], (hit, found)) in GOLDEN {
        let want = vec![
            f.to_string(),
            pct(built, f),
            pct(runs, f),
            cases.to_string(),
            pct(passed, cases),
            pct(hit, found),
        ];
        if rows.get(group) != Some(&want) {
            return Verdict::Fail(format!("{group}: report {:?}, golden {want:?}", rows.get(group)));
        }
    }
    Verdict::Pass("two runs byte-identical; BS/RS/RS_case/coverage cells equal the hand-computed table".into())
}

// ----- 9: fallback to the basic prompt --------------------------------------

fn criterion_9() -> Verdict {
    if let Some(why) = tools_missing(&["cmake", "g++"]) {
        return Verdict::Skip(why);
    }
    let transcripts = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "backend": "scripted",
        "script_dir": fixtures().join("llm/responses"),
        "transcripts": transcripts.path(),
        "harness": {"test_timeout_s": 2},
    });
    let ws = fixture_copy(&config);
    let root = ws.path();
    let lcov = fixtures().join("coverage/official.info");
    let corrupted = "src/common/geometry_utils/src/geometry_utils.cpp";
    let steps = || -> Result<Vec<Value>, String> {
        awtest(root, &["analyze"])?;
        awtest(root, &["bench", "--lcov", lcov.to_str().unwrap()])?;
        let path = root.join(corrupted);
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("@@ unresolved merge @@\n");
        std::fs::write(&path, text).unwrap();
        awtest(root, &["analyze"])?;
        awtest(root, &["gen"])?;
        awtest(root, &["inject"])?;
        awtest(root, &["run"])?;
        awtest(root, &["report"])?;
        Ok(read_json(&root.join(".awtest/generation.json")))
    };
    let records = match steps() {
        Ok(r) => r,
        Err(e) => return Verdict::Fail(e),
    };
    let symbols: Value = read_json(&root.join(".awtest/symbols.json"));
    let unit_ok = symbols["units"]
        .as_array()
        .unwrap()
        .iter()
        .find(|u| u["path"] == corrupted)
        .map(|u| u["parse_ok"].as_bool().unwrap());
    if unit_ok != Some(false) {
        return Verdict::Fail("corrupted file still parses".into());
    }
    let mut basic = 0;
    for r in &records {
        let in_corrupted = r["package"] == "geometry_utils";
        let want = if in_corrupted { "basic" } else { "awtest" };
        if r["mode"] != want {
            return Verdict::Fail(format!("{} used mode {}", r["focal"], r["mode"]));
        }
        if r["test_file"].is_null() {
            return Verdict::Fail(format!("{} has no test file: {}", r["focal"], r["error"]));
        }
        basic += in_corrupted as usize;
    }
    Verdict::Pass(format!(
        "{basic} focals of the unparsable file fell back to basic; every stage exited 0"
    ))
}

fn main() {
    let criteria: [(u32, &str, u64, Check); 9] = [
        (1, "coverage table formulas", 1, criterion_1),
        (2, "RS_case formula", 1, criterion_2),
        (3, "source extraction oracle", 5, criterion_3),
        (4, "call graph oracle", 5, criterion_4),
        (5, "lcov round trip and planted findings", 120, criterion_5),
        (6, "error classifier accuracy", 1, criterion_6),
        (7, "injection laws", 5, criterion_7),
        (8, "end-to-end determinism", 180, criterion_8),
        (9, "basic-prompt fallback", 180, criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = 0;
    for (n, name, budget, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || n.to_string() == *f) {
            continue;
        }
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::Fail(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let verdict = match verdict {
            Verdict::Pass(d) if elapsed > Duration::from_secs(budget) => {
                Verdict::Fail(format!("{d}; took {:.1}s, budget {budget}s", elapsed.as_secs_f64()))
            }
            v => v,
        };
        let (tag, detail) = match verdict {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Skip(d) => ("SKIP", d),
            Verdict::Fail(d) if KNOWN_FAILURES.contains(&n) => ("FAIL (known)", d),
            Verdict::Fail(d) => {
                unexpected += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n} [{tag}] {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
