//! Pull the test source out of a model reply.

use super::GatewayError;

/// Contents of the longest fenced code block, or the whole reply when it
/// has no fence. A language tag on the opening fence is dropped, as is a
/// lone tag line (`cpp`) at the start of unfenced text. An unterminated
/// fence runs to the end of the reply.
pub fn extract_test_source(response: &str) -> Result<String, GatewayError> {
    if response.trim().is_empty() {
        return Err(GatewayError::EmptyResponse);
    }
    let mut blocks: Vec<String> = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in response.lines() {
        let fence = line.trim_start().starts_with("```");
        match (&mut current, fence) {
            (None, true) => current = Some(Vec::new()),
            (Some(lines), true) => {
                blocks.push(lines.join("\n"));
                current = None;
            }
            (Some(lines), false) => lines.push(line),
            (None, false) => {}
        }
    }
    if let Some(lines) = current {
        blocks.push(lines.join("\n"));
    }
    // First longest block wins ties.
    let best = blocks.into_iter().fold(None::<String>, |best, b| match best {
        Some(x) if x.len() >= b.len() => Some(x),
        _ => Some(b),
    });
    let text = match best {
        Some(b) => b,
        None => {
            let t = response.trim_start();
            match t.split_once('\n') {
                Some((first, rest)) if matches!(first.trim(), "cpp" | "c++" | "cxx" | "cc") => rest.to_string(),
                _ => t.to_string(),
            }
        }
    };
    let mut text = text.trim_matches('\n').to_string();
    if text.trim().is_empty() {
        return Err(GatewayError::EmptyResponse);
    }
    text.push('\n');
    Ok(text)
}
