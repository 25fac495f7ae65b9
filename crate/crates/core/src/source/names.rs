//! Text helpers for canonical C++ names and type spellings.

/// Characters next to which whitespace carries no meaning in a type spelling.
fn is_tight(c: char) -> bool {
    matches!(c, '<' | '>' | '(' | ')' | '[' | ']' | ',' | '*' | '&' | ':')
}

/// Collapse whitespace in a type or declarator spelling.
///
/// Runs of whitespace become one space, and spaces next to punctuation are
/// dropped, so `const std::vector<int> &` and `const std::vector< int >&`
/// both become `const std::vector<int>&`.
pub fn normalize_type(text: &str) -> String {
    let collapsed: Vec<&str> = text.split_whitespace().collect();
    let joined = collapsed.join(" ");
    let chars: Vec<char> = joined.chars().collect();
    let mut out = String::with_capacity(joined.len());
    for (i, &c) in chars.iter().enumerate() {
        if c == ' ' {
            let prev = if i > 0 { chars[i - 1] } else { ' ' };
            let next = chars.get(i + 1).copied().unwrap_or(' ');
            if is_tight(prev) || is_tight(next) {
                continue;
            }
        }
        out.push(c);
    }
    out
}

/// Remove every balanced `<...>` group, e.g. `clampValue<double>` -> `clampValue`.
///
/// `operator<` style names are left alone when the brackets do not balance.
pub fn strip_template_args(text: &str) -> String {
    if text.starts_with("operator") {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut depth = 0usize;
    for c in text.chars() {
        match c {
            '<' => depth += 1,
            '>' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    if depth != 0 {
        return text.to_string();
    }
    out
}

/// Split `a::b<int>::c` into `["a", "b", "c"]`, ignoring `::` inside template
/// arguments and dropping a leading global-scope `::`.
pub fn split_scope(text: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '<' => depth += 1,
            '>' if depth > 0 => depth -= 1,
            ':' if depth == 0 && chars.get(i + 1) == Some(&':') => {
                if !current.trim().is_empty() {
                    parts.push(strip_template_args(current.trim()));
                }
                current.clear();
                i += 2;
                continue;
            }
            _ => {}
        }
        current.push(c);
        i += 1;
    }
    if !current.trim().is_empty() {
        parts.push(strip_template_args(current.trim()));
    }
    parts
}

/// Split on commas that are not nested inside `<>`, `()` or `[]`.
pub fn split_top_level_commas(text: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for c in text.chars() {
        match c {
            '<' | '(' | '[' => depth += 1,
            '>' | ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(current.trim().to_string());
                current.clear();
                continue;
            }
            _ => {}
        }
        current.push(c);
    }
    if !current.trim().is_empty() {
        parts.push(current.trim().to_string());
    }
    parts
}
