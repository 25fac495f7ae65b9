use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::classify::{classify_build_error, classify_runtime_error, ClassifyContext};
use super::gtest::{parse_run, parse_test_list, CaseResult};
use super::process::{run, tool_available};
use super::{BuildOutcome, HarnessError, RuntimeClass, TestRunOutcome, TestStatus};

/// Command templates. `{src}` is the package directory, `{build}` its build
/// directory and `{target}` the test target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub configure: Vec<String>,
    pub build: Vec<String>,
    pub test_binary: String,
    pub build_timeout_s: u64,
    pub test_timeout_s: u64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        Self {
            configure: s(&[
                "cmake",
                "-S",
                "{src}",
                "-B",
                "{build}",
                "-DBUILD_TESTING=ON",
                "-DCMAKE_BUILD_TYPE=Debug",
                "-DCMAKE_CXX_FLAGS=--coverage -O0",
            ]),
            build: s(&["cmake", "--build", "{build}", "--target", "{target}"]),
            test_binary: "{build}/{target}".into(),
            build_timeout_s: 600,
            test_timeout_s: 60,
        }
    }
}

fn expand(template: &str, src: &Path, build: &Path, target: &str) -> String {
    template
        .replace("{src}", &src.to_string_lossy())
        .replace("{build}", &build.to_string_lossy())
        .replace("{target}", target)
}

fn expand_all(templates: &[String], src: &Path, build: &Path, target: &str) -> Vec<String> {
    templates.iter().map(|t| expand(t, src, build, target)).collect()
}

/// Configure the package once, then build each target separately. A target
/// is built when its own build invocation exits with status 0.
pub fn build_targets(
    config: &HarnessConfig,
    package: &str,
    package_dir: &Path,
    build_dir: &Path,
    targets: &[String],
    ctx: &ClassifyContext,
) -> Result<Vec<BuildOutcome>, HarnessError> {
    for argv in [&config.configure, &config.build] {
        let tool = argv
            .first()
            .ok_or_else(|| HarnessError::Config("empty command template".into()))?;
        if !tool_available(tool) {
            return Err(HarnessError::ToolMissing(tool.clone()));
        }
    }
    std::fs::create_dir_all(build_dir).map_err(|e| HarnessError::Io {
        path: build_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let limit = Duration::from_secs(config.build_timeout_s);
    let cwd = package_dir;
    let configured = run(&expand_all(&config.configure, package_dir, build_dir, ""), cwd, limit)?;
    let mut out = Vec::new();
    for target in targets {
        let (built, log_text, secs) = if configured.success() {
            let o = run(&expand_all(&config.build, package_dir, build_dir, target), cwd, limit)?;
            (o.success(), o.combined(), o.duration.as_secs_f64())
        } else {
            (false, configured.combined(), configured.duration.as_secs_f64())
        };
        let error_classes = if built {
            Vec::new()
        } else {
            classify_build_error(&log_text, ctx)
        };
        log::info!("{package}/{target}: {}", if built { "built" } else { "build failed" });
        out.push(BuildOutcome {
            package: package.to_string(),
            target: target.clone(),
            built,
            log_text,
            error_classes,
            wall_time_s: secs.max(1e-6),
        });
    }
    Ok(out)
}

/// Results for one test target; `error` is set when the binary could not run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetRun {
    pub target: String,
    pub outcomes: Vec<TestRunOutcome>,
    pub error: Option<String>,
}

pub fn binary_path(config: &HarnessConfig, package_dir: &Path, build_dir: &Path, target: &str) -> PathBuf {
    PathBuf::from(expand(&config.test_binary, package_dir, build_dir, target))
}

/// Run every case of one binary in its own process so that a hang or crash
/// only costs that case (and keeps coverage counters of the others).
pub fn run_target(binary: &Path, target: &str, timeout: Duration) -> Result<Vec<TestRunOutcome>, HarnessError> {
    if !binary.is_file() {
        return Err(HarnessError::BinaryMissing {
            target: target.to_string(),
            path: binary.display().to_string(),
        });
    }
    let cwd = binary.parent().unwrap_or(Path::new("."));
    let bin = binary.to_string_lossy().to_string();
    let listing = run(&[bin.clone(), "--gtest_list_tests".into()], cwd, timeout)?;
    let mut out = Vec::new();
    for case in parse_test_list(&listing.stdout) {
        let o = run(&[bin.clone(), format!("--gtest_filter={case}")], cwd, timeout)?;
        let report = parse_run(&o.combined()).into_iter().find(|r| r.name == case);
        let duration_ms = report
            .as_ref()
            .filter(|r| r.duration_ms > 0)
            .map_or(o.duration.as_millis() as u64, |r| r.duration_ms);
        let (status, runtime_class) = match &report {
            _ if o.timed_out => (TestStatus::Timeout, Some(RuntimeClass::Timeout)),
            Some(r) if matches!(r.result, CaseResult::Ok | CaseResult::Skipped) && o.success() => {
                (TestStatus::Passed, None)
            }
            _ => {
                let text = match &report {
                    Some(r) => format!("{}\n{}", r.output, o.stderr),
                    None => o.combined(),
                };
                let class = classify_runtime_error(&text, false);
                (TestStatus::from_class(class), Some(class))
            }
        };
        out.push(TestRunOutcome {
            target: target.to_string(),
            case_name: case,
            status,
            runtime_class,
            duration_ms,
        });
    }
    Ok(out)
}

pub fn run_tests(
    config: &HarnessConfig,
    package_dir: &Path,
    build_dir: &Path,
    targets: &[String],
) -> Result<Vec<TargetRun>, HarnessError> {
    let timeout = Duration::from_secs(config.test_timeout_s);
    let mut runs = Vec::new();
    for target in targets {
        let binary = binary_path(config, package_dir, build_dir, target);
        let run = match run_target(&binary, target, timeout) {
            Ok(outcomes) => TargetRun {
                target: target.clone(),
                outcomes,
                error: None,
            },
            Err(e @ HarnessError::BinaryMissing { .. }) => TargetRun {
                target: target.clone(),
                outcomes: Vec::new(),
                error: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        runs.push(run);
    }
    Ok(runs)
}

/// Delete `.gcda` counters below `build_dir` so the next run starts at zero.
pub fn reset_coverage_counters(build_dir: &Path) -> Result<usize, HarnessError> {
    let mut n = 0;
    for entry in walkdir::WalkDir::new(build_dir).into_iter().filter_map(Result::ok) {
        if entry.path().extension().is_some_and(|e| e == "gcda") {
            std::fs::remove_file(entry.path()).map_err(|e| HarnessError::Io {
                path: entry.path().display().to_string(),
                message: e.to_string(),
            })?;
            n += 1;
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_expand() {
        let c = HarnessConfig::default();
        let argv = expand_all(&c.build, Path::new("/w/pkg"), Path::new("/b/pkg"), "t1");
        assert_eq!(argv, vec!["cmake", "--build", "/b/pkg", "--target", "t1"]);
        assert_eq!(
            binary_path(&c, Path::new("/w"), Path::new("/b"), "t1"),
            PathBuf::from("/b/t1")
        );
    }

    #[test]
    fn missing_tool_fails_before_building() {
        let c = HarnessConfig {
            configure: vec!["/nonexistent/cmake".into()],
            ..HarnessConfig::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let r = build_targets(
            &c,
            "p",
            dir.path(),
            &dir.path().join("b"),
            &["t".into()],
            &ClassifyContext::default(),
        );
        assert!(matches!(r, Err(HarnessError::ToolMissing(_))));
        assert!(!dir.path().join("b").exists());
    }

    #[test]
    fn missing_binary_is_per_target() {
        let dir = tempfile::tempdir().unwrap();
        let runs = run_tests(&HarnessConfig::default(), dir.path(), dir.path(), &["nope".into()]).unwrap();
        assert_eq!(runs.len(), 1);
        assert!(runs[0].error.as_ref().unwrap().contains("nope"));
    }

    #[test]
    fn fake_binary_cases() {
        // A shell script standing in for a gtest binary.
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("fake");
        std::fs::write(
            &bin,
            "#!/bin/sh\ncase \"$1\" in\n--gtest_list_tests) printf 'S.\\n  Ok\\n  Bad\\n  Hang\\n';;\n\
             --gtest_filter=S.Ok) printf '[ RUN      ] S.Ok\\n[       OK ] S.Ok (3 ms)\\n';;\n\
             --gtest_filter=S.Bad) printf '[ RUN      ] S.Bad\\nt.cpp:4: Failure\\n[  FAILED  ] S.Bad (1 ms)\\n'; exit 1;;\n\
             --gtest_filter=S.Hang) printf '[ RUN      ] S.Hang\\n'; exec sleep 30;;\nesac\n",
        )
        .unwrap();
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&bin, std::fs::Permissions::from_mode(0o755)).unwrap();
        let r = run_target(&bin, "fake", Duration::from_millis(500)).unwrap();
        let status: Vec<_> = r.iter().map(|o| o.status).collect();
        assert_eq!(
            status,
            vec![TestStatus::Passed, TestStatus::AssertionFailed, TestStatus::Timeout]
        );
        assert_eq!(r[0].duration_ms, 3);
        assert_eq!(r[0].runtime_class, None);
        assert_eq!(r[2].runtime_class, Some(RuntimeClass::Timeout));
    }
}
