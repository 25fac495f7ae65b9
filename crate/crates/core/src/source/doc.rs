use tree_sitter::Node;

use super::{DocComment, DocStyle, FunctionRecord, SourceUnit};

/// The documentation block recorded for `f` when `unit` was parsed.
///
/// Extraction itself happens during parsing (see [`doc_for_node`]) because it
/// needs sibling information from the syntax tree.
pub fn extract_doc(unit: &SourceUnit, f: &FunctionRecord) -> Option<DocComment> {
    debug_assert!(unit.functions.iter().any(|g| g.qualified_name == f.qualified_name));
    f.doc.clone()
}

pub(crate) fn comment_style(text: &str) -> DocStyle {
    if text.starts_with("///<") || text.starts_with("/**<") || text.starts_with("//!<") {
        return DocStyle::None;
    }
    if text.starts_with("/**") && text != "/**/" && !text.starts_with("/***") || text.starts_with("/*!") {
        DocStyle::DoxygenBlock
    } else if text.starts_with("///") && !text.starts_with("////") || text.starts_with("//!") {
        DocStyle::LineTripleSlash
    } else {
        DocStyle::None
    }
}

/// True when only whitespace precedes `n` on its first line.
fn starts_line(n: Node, src: &str) -> bool {
    let line_start = src[..n.start_byte()].rfind('\n').map(|i| i + 1).unwrap_or(0);
    src[line_start..n.start_byte()].trim().is_empty()
}

/// Doc comment directly above `anchor`: the previous sibling must be a
/// comment on its own line ending on the line before (or the same line as)
/// the anchor. Consecutive `///` lines are merged.
pub(crate) fn doc_for_node(anchor: Node, src: &str) -> Option<DocComment> {
    let first = anchor.prev_sibling()?;
    if first.kind() != "comment"
        || anchor.start_position().row > first.end_position().row + 1
        || !starts_line(first, src)
    {
        return None;
    }
    let text = &src[first.byte_range()];
    match comment_style(text) {
        DocStyle::None => None,
        DocStyle::DoxygenBlock => Some(DocComment {
            raw_text: text.to_string(),
            style: DocStyle::DoxygenBlock,
        }),
        DocStyle::LineTripleSlash => {
            let mut lines = vec![text.to_string()];
            let mut cur = first;
            while let Some(prev) = cur.prev_sibling() {
                let t = &src[prev.byte_range()];
                if prev.kind() != "comment"
                    || prev.end_position().row + 1 != cur.start_position().row
                    || comment_style(t) != DocStyle::LineTripleSlash
                    || !starts_line(prev, src)
                {
                    break;
                }
                lines.push(t.to_string());
                cur = prev;
            }
            lines.reverse();
            Some(DocComment {
                raw_text: lines.join("\n"),
                style: DocStyle::LineTripleSlash,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_unit;
    use super::*;

    fn doc_of(src: &str) -> Option<DocComment> {
        parse_unit("t.cpp", src).functions[0].doc.clone()
    }

    #[test]
    fn doxygen_block_directly_above() {
        let d = doc_of("/** @brief adds */ int add(int, int);").unwrap();
        assert_eq!(d.style, DocStyle::DoxygenBlock);
        assert_eq!(d.raw_text, "/** @brief adds */");
    }

    #[test]
    fn comment_three_lines_above_is_not_attached() {
        assert_eq!(doc_of("/// unrelated\n\n\nint f(int x) { return x; }"), None);
    }

    #[test]
    fn plain_comment_is_not_a_doc() {
        assert_eq!(doc_of("// just a note\nint f(int x) { return x; }"), None);
    }

    #[test]
    fn triple_slash_lines_merge() {
        let d = doc_of("// header\n/// one\n/// two\nint f(int x) { return x; }").unwrap();
        assert_eq!(d.style, DocStyle::LineTripleSlash);
        assert_eq!(d.raw_text, "/// one\n/// two");
    }

    #[test]
    fn template_doc_sits_above_template_line() {
        let d = doc_of("/** clamp */\ntemplate <typename T>\nT c(T v) { return v; }").unwrap();
        assert_eq!(d.style, DocStyle::DoxygenBlock);
    }

    #[test]
    fn trailing_member_comment_is_ignored() {
        assert_eq!(comment_style("///< member"), DocStyle::None);
        assert_eq!(comment_style("/**/"), DocStyle::None);
        assert_eq!(comment_style("//! qt style"), DocStyle::LineTripleSlash);
    }
}
