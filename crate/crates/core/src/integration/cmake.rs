//! Minimal CMake command lexer.
//!
//! Only the command-invocation grammar is handled: `name(args...)` with
//! unquoted, quoted and bracket arguments, nested parentheses, line comments
//! and bracket comments. Nothing is evaluated, so `${VAR}` stays verbatim.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::CmakeError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Command {
    /// Lower-cased command name.
    pub name: String,
    pub args: Vec<String>,
    pub line: u32,
    pub start: usize,
    pub end: usize,
}

/// Test registration macro family already used by a package.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum TestMacroStyle {
    AmentAddGtest,
    AmentAutoAddGtest,
    AmentAddRosIsolatedGtest,
    CatkinAddGtest,
    GtestDiscoverTests,
    Generic,
}

impl TestMacroStyle {
    pub fn macro_name(self) -> &'static str {
        match self {
            TestMacroStyle::AmentAddGtest => "ament_add_gtest",
            TestMacroStyle::AmentAutoAddGtest => "ament_auto_add_gtest",
            TestMacroStyle::AmentAddRosIsolatedGtest => "ament_add_ros_isolated_gtest",
            TestMacroStyle::CatkinAddGtest => "catkin_add_gtest",
            TestMacroStyle::GtestDiscoverTests => "gtest_discover_tests",
            TestMacroStyle::Generic => "add_executable",
        }
    }

    fn from_command(name: &str) -> Option<Self> {
        Some(match name {
            "ament_add_gtest" => TestMacroStyle::AmentAddGtest,
            "ament_auto_add_gtest" => TestMacroStyle::AmentAutoAddGtest,
            "ament_add_ros_isolated_gtest" => TestMacroStyle::AmentAddRosIsolatedGtest,
            "catkin_add_gtest" => TestMacroStyle::CatkinAddGtest,
            "gtest_discover_tests" | "gtest_add_tests" => TestMacroStyle::GtestDiscoverTests,
            _ => return None,
        })
    }
}

/// What a CMakeLists tells us about a package.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmakeInfo {
    /// Dependency names in order of first appearance.
    pub deps: Vec<String>,
    pub test_macro_style: TestMacroStyle,
    /// Libraries the package builds (`add_library`, `ament_auto_add_library`).
    pub library_targets: Vec<String>,
    /// True when any test-registration command is present.
    pub registers_tests: bool,
}

const DEP_KEYWORDS: &[&str] = &["PUBLIC", "PRIVATE", "INTERFACE", "SYSTEM"];

/// Extract dependencies, test style and library targets.
pub fn parse_cmake(text: &str) -> Result<CmakeInfo, CmakeError> {
    let commands = lex(text)?;
    let mut deps: Vec<String> = Vec::new();
    let mut push = |d: &str| {
        if !d.is_empty() && !d.starts_with("${") && !deps.iter().any(|x| x == d) {
            deps.push(d.to_string());
        }
    };
    let mut style = None;
    let mut libraries = Vec::new();
    let mut registers_tests = false;
    for c in &commands {
        match c.name.as_str() {
            "find_package" => {
                if let Some(first) = c.args.first() {
                    push(first);
                }
                if c.args.first().map(String::as_str) == Some("catkin") {
                    if let Some(i) = c.args.iter().position(|a| a == "COMPONENTS") {
                        for a in &c.args[i + 1..] {
                            push(a);
                        }
                    }
                }
            }
            "ament_target_dependencies" => {
                for a in c.args.iter().skip(1).filter(|a| !DEP_KEYWORDS.contains(&a.as_str())) {
                    push(a);
                }
            }
            "ament_export_dependencies" => {
                for a in &c.args {
                    push(a);
                }
            }
            "add_library" | "ament_auto_add_library" => {
                let imported = c.args.iter().any(|a| a == "IMPORTED" || a == "ALIAS");
                if let (Some(name), false) = (c.args.first(), imported) {
                    if !libraries.contains(name) {
                        libraries.push(name.clone());
                    }
                }
            }
            "add_test" => registers_tests = true,
            name => {
                if let Some(s) = TestMacroStyle::from_command(name) {
                    registers_tests = true;
                    style.get_or_insert(s);
                }
            }
        }
    }
    Ok(CmakeInfo {
        deps,
        test_macro_style: style.unwrap_or(TestMacroStyle::Generic),
        library_targets: libraries,
        registers_tests,
    })
}

/// Tokenise `text` into command invocations.
pub fn lex(text: &str) -> Result<Vec<Command>, CmakeError> {
    let b = text.as_bytes();
    let mut i = 0;
    let mut line = 1u32;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i];
        if c == b'\n' {
            line += 1;
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'#' {
            i = skip_comment(b, i, &mut line)?;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            let start_line = line;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            let name = text[start..i].to_ascii_lowercase();
            while i < b.len() && (b[i] == b' ' || b[i] == b'\t') {
                i += 1;
            }
            if i >= b.len() || b[i] != b'(' {
                return Err(CmakeError::Syntax {
                    line: start_line,
                    message: format!("expected `(` after `{name}`"),
                });
            }
            let (args, end) = lex_args(text, i + 1, &mut line, start_line)?;
            out.push(Command {
                name,
                args,
                line: start_line,
                start,
                end,
            });
            i = end;
        } else {
            return Err(CmakeError::Syntax {
                line,
                message: format!("unexpected character `{}`", text[i..].chars().next().unwrap_or('?')),
            });
        }
    }
    Ok(out)
}

/// Length of `[==[` style bracket opener at `i`, returning the `=` count.
fn bracket_open(b: &[u8], i: usize) -> Option<usize> {
    if b.get(i) != Some(&b'[') {
        return None;
    }
    let mut j = i + 1;
    while b.get(j) == Some(&b'=') {
        j += 1;
    }
    if b.get(j) == Some(&b'[') {
        Some(j - i - 1)
    } else {
        None
    }
}

/// Skip a bracket body starting after its opener; returns the index after the closer.
fn skip_bracket(b: &[u8], mut i: usize, eqs: usize, line: &mut u32, start_line: u32) -> Result<usize, CmakeError> {
    let mut closer = vec![b']'];
    closer.extend(std::iter::repeat_n(b'=', eqs));
    closer.push(b']');
    while i < b.len() {
        if b[i..].starts_with(&closer) {
            return Ok(i + closer.len());
        }
        if b[i] == b'\n' {
            *line += 1;
        }
        i += 1;
    }
    Err(CmakeError::Syntax {
        line: start_line,
        message: "unterminated bracket argument or comment".into(),
    })
}

fn skip_comment(b: &[u8], i: usize, line: &mut u32) -> Result<usize, CmakeError> {
    if let Some(eqs) = bracket_open(b, i + 1) {
        let start_line = *line;
        return skip_bracket(b, i + eqs + 3, eqs, line, start_line);
    }
    let mut j = i;
    while j < b.len() && b[j] != b'\n' {
        j += 1;
    }
    Ok(j)
}

fn lex_args(text: &str, mut i: usize, line: &mut u32, start_line: u32) -> Result<(Vec<String>, usize), CmakeError> {
    let b = text.as_bytes();
    let mut args = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    let flush = |current: &mut String, args: &mut Vec<String>| {
        if !current.is_empty() {
            args.push(std::mem::take(current));
        }
    };
    while i < b.len() {
        let c = b[i];
        match c {
            b'\n' => {
                *line += 1;
                flush(&mut current, &mut args);
                i += 1;
            }
            b' ' | b'\t' | b'\r' => {
                flush(&mut current, &mut args);
                i += 1;
            }
            b'#' => {
                flush(&mut current, &mut args);
                i = skip_comment(b, i, line)?;
            }
            b'(' => {
                depth += 1;
                flush(&mut current, &mut args);
                i += 1;
            }
            b')' => {
                flush(&mut current, &mut args);
                i += 1;
                if depth == 0 {
                    return Ok((args, i));
                }
                depth -= 1;
            }
            b'"' => {
                let qstart = *line;
                i += 1;
                let start = i;
                while i < b.len() && b[i] != b'"' {
                    if b[i] == b'\\' {
                        i += 1;
                    }
                    if i < b.len() && b[i] == b'\n' {
                        *line += 1;
                    }
                    i += 1;
                }
                if i >= b.len() {
                    return Err(CmakeError::Syntax {
                        line: qstart,
                        message: "unterminated quoted argument".into(),
                    });
                }
                current.push_str(&text[start..i]);
                i += 1;
            }
            b'[' if bracket_open(b, i).is_some() && current.is_empty() => {
                let eqs = bracket_open(b, i).unwrap_or(0);
                let body_start = i + eqs + 2;
                let end = skip_bracket(b, body_start, eqs, line, *line)?;
                args.push(text[body_start..end - eqs - 2].to_string());
                i = end;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or(' ');
                current.push(ch);
                i += ch.len_utf8();
            }
        }
    }
    Err(CmakeError::Syntax {
        line: start_line,
        message: "unterminated command invocation".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_find_package() {
        let info = parse_cmake("find_package(rclcpp REQUIRED)\n").unwrap();
        assert_eq!(info.deps, vec!["rclcpp"]);
        assert_eq!(info.test_macro_style, TestMacroStyle::Generic);
    }

    #[test]
    fn no_dependencies() {
        let info = parse_cmake("cmake_minimum_required(VERSION 3.14)\nproject(x)\n").unwrap();
        assert!(info.deps.is_empty());
        assert!(!info.registers_tests);
    }

    #[test]
    fn ament_dependency_commands() {
        let text = "ament_target_dependencies(foo PUBLIC rclcpp tf2)\nament_export_dependencies(eigen rclcpp)\n";
        assert_eq!(parse_cmake(text).unwrap().deps, vec!["rclcpp", "tf2", "eigen"]);
    }

    #[test]
    fn catkin_components() {
        let info =
            parse_cmake("find_package(catkin REQUIRED COMPONENTS roscpp std_msgs)\ncatkin_add_gtest(t test/t.cpp)")
                .unwrap();
        assert_eq!(info.deps, vec!["catkin", "roscpp", "std_msgs"]);
        assert_eq!(info.test_macro_style, TestMacroStyle::CatkinAddGtest);
    }

    #[test]
    fn comments_quotes_and_brackets() {
        let text = "#[[ find_package(hidden) ]]\n# find_package(also_hidden)\nmessage(\"a ) b\" [=[ x ) ]=])\nfind_package( Eigen3  # trailing\n REQUIRED)\n";
        let cmds = lex(text).unwrap();
        assert_eq!(cmds[0].args, vec!["a ) b", " x ) "]);
        assert_eq!(parse_cmake(text).unwrap().deps, vec!["Eigen3"]);
        assert_eq!(cmds[1].line, 4);
    }

    #[test]
    fn nested_parentheses_in_conditions() {
        let cmds = lex("if((A AND B) OR C)\nendif()").unwrap();
        assert_eq!(cmds[0].args, vec!["A", "AND", "B", "OR", "C"]);
        assert_eq!(cmds[1].name, "endif");
    }

    #[test]
    fn library_targets_skip_imported() {
        let info = parse_cmake("add_library(core src/a.cpp)\nadd_library(ext SHARED IMPORTED)\nament_auto_add_library(node SHARED src/n.cpp)").unwrap();
        assert_eq!(info.library_targets, vec!["core", "node"]);
    }

    #[test]
    fn unterminated_invocation_reports_line() {
        let err = lex("project(x)\nfind_package(foo\n").unwrap_err();
        assert!(matches!(err, CmakeError::Syntax { line: 2, .. }));
    }
}
