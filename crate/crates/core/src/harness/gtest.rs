//! GoogleTest console output.

/// Parse `--gtest_list_tests` output into `Suite.Case` names.
pub fn parse_test_list(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut suite = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let item = line.split('#').next().unwrap_or("").trim_end();
        if !line.starts_with(' ') {
            if let Some(s) = item.trim().strip_suffix('.') {
                suite = s.to_string();
            }
        } else if !suite.is_empty() && !item.trim().is_empty() {
            out.push(format!("{suite}.{}", item.trim()));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseResult {
    Ok,
    Failed,
    Skipped,
    /// Started but never reported (the process died).
    Unfinished,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseReport {
    pub name: String,
    pub result: CaseResult,
    pub duration_ms: u64,
    /// Output printed between the RUN line and the result line.
    pub output: String,
}

fn bracket_line(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix('[')?;
    let close = rest.find(']')?;
    Some((rest[..close].trim(), rest[close + 1..].trim()))
}

fn name_and_ms(rest: &str) -> (String, u64) {
    match rest.rfind(" (") {
        Some(i) if rest.ends_with(" ms)") => {
            let ms = rest[i + 2..rest.len() - 4].trim().parse().unwrap_or(0);
            (rest[..i].to_string(), ms)
        }
        _ => (rest.to_string(), 0),
    }
}

/// Per-case results of a test binary run.
pub fn parse_run(text: &str) -> Vec<CaseReport> {
    let mut out: Vec<CaseReport> = Vec::new();
    let mut open: Option<(String, Vec<String>)> = None;
    for line in text.lines() {
        match bracket_line(line) {
            Some(("RUN", rest)) => {
                if let Some((name, lines)) = open.take() {
                    out.push(CaseReport {
                        name,
                        result: CaseResult::Unfinished,
                        duration_ms: 0,
                        output: lines.join("\n"),
                    });
                }
                open = Some((rest.to_string(), Vec::new()));
            }
            Some((tag @ ("OK" | "FAILED" | "SKIPPED"), rest)) if open.is_some() => {
                let (name, ms) = name_and_ms(rest);
                let (open_name, lines) = open.take().unwrap_or_default();
                if name != open_name {
                    // A summary line, not the result of the running case.
                    open = Some((open_name, lines));
                    continue;
                }
                let result = match tag {
                    "OK" => CaseResult::Ok,
                    "FAILED" => CaseResult::Failed,
                    _ => CaseResult::Skipped,
                };
                out.push(CaseReport {
                    name,
                    result,
                    duration_ms: ms,
                    output: lines.join("\n"),
                });
            }
            _ => {
                if let Some((_, lines)) = open.as_mut() {
                    lines.push(line.to_string());
                }
            }
        }
    }
    if let Some((name, lines)) = open {
        out.push(CaseReport {
            name,
            result: CaseResult::Unfinished,
            duration_ms: 0,
            output: lines.join("\n"),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_tests() {
        let text = "Running main() from gmock_main.cc\nGeo.\n  A\n  B\nParam/Suite.\n  C/0  # GetParam() = 1\n";
        assert_eq!(parse_test_list(text), vec!["Geo.A", "Geo.B", "Param/Suite.C/0"]);
    }

    #[test]
    fn run_results() {
        let text = "[==========] Running 3 tests from 1 test suite.\n[ RUN      ] S.A\n[       OK ] S.A (0 ms)\n[ RUN      ] S.B\nt.cpp:5: Failure\nExpected equality of these values:\n[  FAILED  ] S.B (1 ms)\n[ RUN      ] S.C\nterminate called after throwing an instance of 'std::out_of_range'\n";
        let r = parse_run(text);
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].result, CaseResult::Ok);
        assert_eq!(r[1].result, CaseResult::Failed);
        assert_eq!(r[1].duration_ms, 1);
        assert!(r[1].output.contains("Expected equality"));
        assert_eq!(r[2].result, CaseResult::Unfinished);
    }

    #[test]
    fn summary_lines_are_ignored() {
        let text = "[ RUN      ] S.A\n[  FAILED  ] S.A (0 ms)\n[==========] 1 test ran.\n[  FAILED  ] 1 test, listed below:\n[  FAILED  ] S.A\n";
        assert_eq!(parse_run(text).len(), 1);
    }
}
