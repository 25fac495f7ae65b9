//! Reversible injection of generated test targets into a CMakeLists.
//!
//! Everything we add lives between two sentinel comment lines. Removal
//! deletes exactly those lines (plus the newline we had to add when the
//! original file did not end with one), so `remove(inject(t)) == t`.

use super::cmake::{lex, parse_cmake, TestMacroStyle};
use super::{CmakeError, TestRegistration};

pub const BLOCK_START: &str = "# >>> awtest generated";
pub const BLOCK_END: &str = "# <<< awtest generated";

/// Byte range of the sentinel block: from the start of the opening line to
/// the end of the closing line including its newline, if any.
fn find_block(text: &str) -> Result<Option<(usize, usize)>, CmakeError> {
    let mut start = None;
    let mut found = None;
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        let trimmed = line.trim();
        if trimmed == BLOCK_START {
            if start.is_some() || found.is_some() {
                return Err(CmakeError::CorruptBlock(format!(
                    "unexpected block start on line {}",
                    i + 1
                )));
            }
            start = Some(offset);
        } else if trimmed == BLOCK_END {
            match start.take() {
                Some(s) => found = Some((s, offset + line.len())),
                None => {
                    return Err(CmakeError::CorruptBlock(format!(
                        "block end without start on line {}",
                        i + 1
                    )));
                }
            }
        }
        offset += line.len();
    }
    if start.is_some() {
        return Err(CmakeError::CorruptBlock("block start without end".into()));
    }
    Ok(found)
}

/// Delete the generated block. Text without a block is returned unchanged.
pub fn remove_injection(text: &str) -> Result<String, CmakeError> {
    let Some((start, end)) = find_block(text)? else {
        return Ok(text.to_string());
    };
    let mut start = start;
    if end == text.len() && !text.ends_with('\n') && start > 0 && text.as_bytes()[start - 1] == b'\n' {
        // The block was appended to a file lacking a final newline.
        start -= 1;
    }
    let mut out = String::with_capacity(text.len());
    out.push_str(&text[..start]);
    out.push_str(&text[end..]);
    Ok(out)
}

/// Lines registering one test target in the given style.
pub fn registration_lines(style: TestMacroStyle, r: &TestRegistration) -> Vec<String> {
    let t = &r.target_name;
    let f = &r.test_file;
    let libs = r.linked_deps.join(" ");
    let link = |extra: &str| {
        let all = [libs.as_str(), extra]
            .iter()
            .filter(|s| !s.is_empty())
            .copied()
            .collect::<Vec<_>>()
            .join(" ");
        if all.is_empty() {
            None
        } else {
            Some(format!("target_link_libraries({t} {all})"))
        }
    };
    let mut lines = Vec::new();
    match style {
        TestMacroStyle::AmentAddGtest
        | TestMacroStyle::AmentAutoAddGtest
        | TestMacroStyle::AmentAddRosIsolatedGtest => {
            lines.push(format!("{}({t} {f})", style.macro_name()));
            lines.extend(link(""));
        }
        TestMacroStyle::CatkinAddGtest => {
            lines.push(format!("catkin_add_gtest({t} {f})"));
            lines.extend(link("${catkin_LIBRARIES}"));
        }
        TestMacroStyle::GtestDiscoverTests => {
            lines.push(format!("add_executable({t} {f})"));
            lines.extend(link("GTest::gtest_main"));
            lines.push(format!("gtest_discover_tests({t})"));
        }
        TestMacroStyle::Generic => {
            lines.push(format!("add_executable({t} {f})"));
            lines.extend(link("gtest_main gtest pthread"));
            lines.push(format!("add_test(NAME {t} COMMAND {t})"));
        }
    }
    lines
}

/// Insert one sentinel block registering `registrations`.
///
/// An existing block is replaced, so injecting the same set twice gives the
/// same text. The block goes inside the first `if(BUILD_TESTING)` (or
/// `if(CATKIN_ENABLE_TESTING)`) conditional; without one, a guarded block is
/// appended at the end of the file. Empty `registrations` leave the text as is.
pub fn inject_tests(text: &str, registrations: &[TestRegistration]) -> Result<String, CmakeError> {
    if registrations.is_empty() {
        return Ok(text.to_string());
    }
    let mut seen = std::collections::BTreeSet::new();
    for r in registrations {
        if !seen.insert(&r.target_name) {
            return Err(CmakeError::DuplicateTarget(r.target_name.clone()));
        }
    }
    let base = remove_injection(text)?;
    let style = parse_cmake(&base)?.test_macro_style;
    let body: Vec<String> = registrations
        .iter()
        .flat_map(|r| registration_lines(style, r))
        .collect();

    match testing_endif(&base)? {
        Some((pos, indent)) => {
            let inner = format!("{indent}  ");
            let mut block = String::new();
            block.push_str(&format!("{inner}{BLOCK_START}\n"));
            for l in &body {
                block.push_str(&format!("{inner}{l}\n"));
            }
            block.push_str(&format!("{inner}{BLOCK_END}\n"));
            let mut out = String::with_capacity(base.len() + block.len());
            out.push_str(&base[..pos]);
            out.push_str(&block);
            out.push_str(&base[pos..]);
            Ok(out)
        }
        None => {
            let mut lines = vec![BLOCK_START.to_string(), "if(BUILD_TESTING)".to_string()];
            lines.extend(body.iter().map(|l| format!("  {l}")));
            lines.push("endif()".to_string());
            lines.push(BLOCK_END.to_string());
            let block = lines.join("\n");
            if base.ends_with('\n') {
                Ok(format!("{base}{block}\n"))
            } else {
                Ok(format!("{base}\n{block}"))
            }
        }
    }
}

/// Start offset of the line holding the `endif` that closes the first
/// testing conditional, with that line's indentation.
fn testing_endif(text: &str) -> Result<Option<(usize, String)>, CmakeError> {
    let commands = lex(text)?;
    let opener = commands.iter().position(|c| {
        c.name == "if"
            && c.args
                .iter()
                .any(|a| a == "BUILD_TESTING" || a == "CATKIN_ENABLE_TESTING")
    });
    let Some(opener) = opener else {
        return Ok(None);
    };
    let mut depth = 0usize;
    for c in &commands[opener + 1..] {
        match c.name.as_str() {
            "if" => depth += 1,
            "endif" if depth == 0 => {
                let line_start = text[..c.start].rfind('\n').map(|i| i + 1).unwrap_or(0);
                let prefix = &text[line_start..c.start];
                if !prefix.trim().is_empty() {
                    // `endif()` shares its line with other code; append instead.
                    return Ok(None);
                }
                return Ok(Some((line_start, prefix.to_string())));
            }
            "endif" => depth -= 1,
            _ => {}
        }
    }
    Ok(None)
}
