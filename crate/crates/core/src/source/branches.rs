use tree_sitter::Node;

/// Count branch-introducing constructs below `node`.
///
/// Counted: `if` (an `else if` is a nested `if`), each `case` label (not
/// `default`), `for`, range-for, `while`, `do`-`while`, the conditional
/// operator and each `catch` clause. Nested constructs count once each.
pub fn count_branches(node: Node) -> u32 {
    let mut count = 0;
    let mut cursor = node.walk();
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        if is_branch(n) {
            count += 1;
        }
        for child in n.children(&mut cursor) {
            stack.push(child);
        }
    }
    count
}

fn is_branch(n: Node) -> bool {
    match n.kind() {
        "if_statement"
        | "for_statement"
        | "for_range_loop"
        | "while_statement"
        | "do_statement"
        | "conditional_expression"
        | "catch_clause" => true,
        "case_statement" => n.child(0).map(|c| c.kind() == "case").unwrap_or(false),
        _ => false,
    }
}

/// Parse `text` as a translation unit and count branches over the whole tree.
pub fn count_branches_in_source(text: &str) -> u32 {
    let tree = super::parse::parse_tree(text);
    count_branches(tree.root_node())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_body_has_no_branches() {
        assert_eq!(count_branches_in_source("int f(int a) { return a * 2 + 1; }"), 0);
    }

    #[test]
    fn if_else_and_for_count_two() {
        let src = "void f(int n) { if (n) { g(); } else { h(); } for (int i = 0; i < n; ++i) {} }";
        assert_eq!(count_branches_in_source(src), 2);
    }

    #[test]
    fn else_if_switch_ternary_catch() {
        let src = r#"
int f(int x) {
  if (x > 1) { return 1; } else if (x < 0) { return 2; }
  switch (x) { case 0: break; case 1: break; default: break; }
  do { --x; } while (x > 5);
  try { return x ? 3 : 4; } catch (const std::exception &) { return 5; } catch (...) { return 6; }
}"#;
        // if, else-if, 2 cases, do-while, ternary, 2 catches
        assert_eq!(count_branches_in_source(src), 8);
    }

    #[test]
    fn empty_input_counts_zero() {
        assert_eq!(count_branches_in_source(""), 0);
    }
}
