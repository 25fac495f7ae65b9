//! Function documents, from developer comments or from a model reply.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::source::DocComment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum DocOrigin {
    Developer,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
pub struct GeneratedDoc {
    pub description: String,
    pub param_notes: Vec<String>,
    pub return_note: String,
    pub origin: DocOrigin,
}

impl GeneratedDoc {
    /// Text for the prompt's document section.
    pub fn render(&self) -> String {
        let mut s = self.description.clone();
        if !self.param_notes.is_empty() {
            s.push_str("\nArguments:");
            for p in &self.param_notes {
                s.push_str(&format!("\n- {p}"));
            }
        }
        if !self.return_note.is_empty() {
            s.push_str(&format!("\nReturns: {}", self.return_note));
        }
        s
    }
}

/// Comment body with `/** */`, `///` and leading `*` markers removed.
fn comment_lines(raw: &str) -> Vec<String> {
    let mut lines = Vec::new();
    for line in raw.lines() {
        let mut l = line.trim();
        for prefix in ["/**", "/*!", "///", "//!", "//", "/*"] {
            if let Some(rest) = l.strip_prefix(prefix) {
                l = rest;
                break;
            }
        }
        l = l.strip_suffix("*/").unwrap_or(l).trim();
        l = l.strip_prefix('*').map(str::trim).unwrap_or(l);
        if !l.is_empty() {
            lines.push(l.to_string());
        }
    }
    lines
}

/// Split a developer comment into description, `@param` and `@return` notes.
pub fn from_comment(doc: &DocComment) -> Option<GeneratedDoc> {
    let mut description = Vec::new();
    let mut params = Vec::new();
    let mut ret = Vec::new();
    for l in comment_lines(&doc.raw_text) {
        let tag = l.strip_prefix('@').or_else(|| l.strip_prefix('\\'));
        match tag {
            Some(t) if t.starts_with("param") => {
                let mut rest = t["param".len()..].trim_start();
                if rest.starts_with('[') {
                    rest = rest.find(']').map(|i| &rest[i + 1..]).unwrap_or(rest);
                }
                let mut it = rest.trim().splitn(2, char::is_whitespace);
                let name = it.next().unwrap_or("").to_string();
                let text = it.next().unwrap_or("").trim().to_string();
                params.push(if text.is_empty() {
                    name
                } else {
                    format!("{name}: {text}")
                });
            }
            Some(t) if t.starts_with("return") => {
                let rest = t.trim_start_matches("returns").trim_start_matches("return").trim();
                ret.push(rest.to_string());
            }
            Some(t) if t.starts_with("brief") => description.push(t["brief".len()..].trim().to_string()),
            _ => description.push(l),
        }
    }
    let description = description.join(" ").trim().to_string();
    if description.is_empty() && params.is_empty() && ret.is_empty() {
        return None;
    }
    Some(GeneratedDoc {
        description: if description.is_empty() {
            "(no summary)".into()
        } else {
            description
        },
        param_notes: params,
        return_note: ret.join(" "),
        origin: DocOrigin::Developer,
    })
}

const HEADINGS: [&str; 3] = ["functionality:", "arguments:", "return value:"];

/// Read a reply to the documentation prompt. Falls back to the whole reply
/// as the description when the headings are missing.
pub fn parse_doc_response(text: &str) -> Option<GeneratedDoc> {
    let mut sections: [Vec<String>; 3] = Default::default();
    let mut current: Option<usize> = None;
    let mut saw_heading = false;
    for line in text.lines() {
        let t = line.trim().trim_start_matches('#').trim().trim_matches('*').trim();
        let lower = t.to_lowercase();
        if let Some(i) = HEADINGS.iter().position(|h| lower.starts_with(h)) {
            current = Some(i);
            saw_heading = true;
            let rest = t[HEADINGS[i].len()..].trim().trim_start_matches('*').trim();
            if !rest.is_empty() {
                sections[i].push(rest.to_string());
            }
        } else if let (Some(i), false) = (current, t.is_empty()) {
            sections[i].push(t.trim_start_matches(['-', '*']).trim().to_string());
        }
    }
    if !saw_heading || sections[0].is_empty() {
        let whole = text.trim();
        if whole.is_empty() {
            return None;
        }
        return Some(GeneratedDoc {
            description: whole.to_string(),
            param_notes: Vec::new(),
            return_note: String::new(),
            origin: DocOrigin::Llm,
        });
    }
    Some(GeneratedDoc {
        description: sections[0].join(" "),
        param_notes: sections[1].clone(),
        return_note: sections[2].join(" "),
        origin: DocOrigin::Llm,
    })
}
