//! `{{name}}` placeholder substitution.

use std::collections::BTreeMap;

pub const SYSTEM: &str = include_str!("../../templates/system.txt");
pub const BASIC: &str = include_str!("../../templates/basic.txt");
pub const AWTEST: &str = include_str!("../../templates/awtest.txt");
pub const DOCGEN: &str = include_str!("../../templates/docgen.txt");

/// Replace every `{{key}}` in one left-to-right pass. Substituted values
/// are never rescanned, so source text containing braces is safe. Unknown
/// placeholders are left as written.
pub fn render(template: &str, vars: &BTreeMap<&str, String>) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        match after.find("}}") {
            Some(close) if vars.contains_key(after[..close].trim()) => {
                out.push_str(&vars[after[..close].trim()]);
                rest = &after[close + 2..];
            }
            _ => {
                out.push_str("{{");
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}
