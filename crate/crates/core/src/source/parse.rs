use std::collections::BTreeSet;

use tree_sitter::{Node, Parser, Tree};

use super::branches::count_branches;
use super::doc::doc_for_node;
use super::names::{normalize_type, split_scope, strip_template_args};
use super::{
    Access, BlockKind, CallSite, ClassKind, ClassRecord, FunctionRecord, GuardedBlock, Include, IncludeForm, LineSpan,
    MemberField, MemberKind, Param, SourceUnit,
};

pub(crate) const ANON_NAMESPACE: &str = "(anonymous namespace)";

const SPECIFIER_WORDS: &[&str] = &[
    "static",
    "inline",
    "virtual",
    "explicit",
    "constexpr",
    "consteval",
    "friend",
    "extern",
];

const NOT_CALLS: &[&str] = &[
    "static_cast",
    "dynamic_cast",
    "reinterpret_cast",
    "const_cast",
    "decltype",
    "sizeof",
    "alignof",
    "typeid",
    "noexcept",
    "static_assert",
];

pub(crate) fn parse_tree(text: &str) -> Tree {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_cpp::LANGUAGE.into())
        .expect("bundled C++ grammar is compatible with the tree-sitter runtime");
    parser
        .parse(text, None)
        .expect("parser has a language and no cancellation flag")
}

/// Parse raw bytes, replacing invalid UTF-8 sequences.
pub fn parse_unit_bytes(path: &str, bytes: &[u8]) -> SourceUnit {
    parse_unit(path, &String::from_utf8_lossy(bytes))
}

/// Parse one translation unit.
///
/// Never fails: a file the grammar cannot parse cleanly yields `parse_ok =
/// false` with no function or class records (includes are still reported).
/// `package_name` is left empty for the caller to fill in.
pub fn parse_unit(path: &str, text: &str) -> SourceUnit {
    let tree = parse_tree(text);
    let root = tree.root_node();
    let mut unit = SourceUnit {
        path: path.to_string(),
        package_name: String::new(),
        includes: Vec::new(),
        functions: Vec::new(),
        classes: Vec::new(),
        parse_ok: !root.has_error(),
        line_count: text.lines().count() as u32,
    };
    collect_includes(root, text, &mut unit.includes);
    if !unit.parse_ok {
        log::debug!("{path}: syntax errors, no records extracted");
        return unit;
    }
    let mut walker = Walker {
        src: text,
        path,
        namespaces: BTreeSet::new(),
        class_names: BTreeSet::new(),
        functions: Vec::new(),
        classes: Vec::new(),
    };
    walker.prescan(root);
    walker.items(root, &Scope::default());
    walker.link_local();
    unit.functions = walker.functions;
    unit.classes = walker.classes;
    unit
}

fn collect_includes(node: Node, src: &str, out: &mut Vec<Include>) {
    let mut cursor = node.walk();
    for child in node.named_children(&mut cursor) {
        match child.kind() {
            "preproc_include" => {
                let Some(p) = child.child_by_field_name("path") else {
                    continue;
                };
                let raw = src[p.byte_range()].trim();
                let (header, form) = match p.kind() {
                    "system_lib_string" => (raw.trim_start_matches('<').trim_end_matches('>'), IncludeForm::Angle),
                    "string_literal" => (raw.trim_matches('"'), IncludeForm::Quote),
                    _ => continue,
                };
                out.push(Include {
                    header: header.to_string(),
                    form,
                });
            }
            "function_definition" => {}
            _ => collect_includes(child, src, out),
        }
    }
}

#[derive(Clone, Default)]
struct Scope {
    namespaces: Vec<String>,
    class: Option<ClassScope>,
    template: bool,
}

#[derive(Clone)]
struct ClassScope {
    path: Vec<String>,
    access: Access,
}

struct Walker<'a> {
    src: &'a str,
    path: &'a str,
    namespaces: BTreeSet<String>,
    class_names: BTreeSet<String>,
    functions: Vec<FunctionRecord>,
    classes: Vec<ClassRecord>,
}

fn row(n: Node) -> u32 {
    n.start_position().row as u32 + 1
}

fn end_row(n: Node) -> u32 {
    n.end_position().row as u32 + 1
}

fn span(n: Node) -> LineSpan {
    LineSpan::new(row(n), end_row(n))
}

fn named_children(n: Node) -> Vec<Node> {
    let mut cursor = n.walk();
    n.named_children(&mut cursor).collect()
}

impl<'a> Walker<'a> {
    fn text(&self, n: Node) -> &'a str {
        &self.src[n.byte_range()]
    }

    /// Record namespace and class names so out-of-line qualifiers can be told apart.
    fn prescan(&mut self, node: Node) {
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            match n.kind() {
                "namespace_definition" => {
                    if let Some(name) = n.child_by_field_name("name") {
                        for seg in split_scope(self.text(name)) {
                            self.namespaces.insert(seg);
                        }
                    }
                }
                "class_specifier" | "struct_specifier" => {
                    if let Some(name) = n.child_by_field_name("name") {
                        if let Some(last) = split_scope(self.text(name)).pop() {
                            self.class_names.insert(last);
                        }
                    }
                }
                "function_definition" => continue,
                _ => {}
            }
            stack.extend(named_children(n));
        }
    }

    fn items(&mut self, node: Node, scope: &Scope) {
        let mut scope = scope.clone();
        for child in named_children(node) {
            self.item(child, child, &mut scope);
        }
    }

    /// Handle one declaration-level node. `anchor` is the node doc comments
    /// attach to (the enclosing template declaration, if any).
    fn item(&mut self, node: Node, anchor: Node, scope: &mut Scope) {
        match node.kind() {
            "namespace_definition" => {
                let mut inner = scope.clone();
                match node.child_by_field_name("name") {
                    Some(name) => inner.namespaces.extend(split_scope(self.text(name))),
                    None => inner.namespaces.push(ANON_NAMESPACE.to_string()),
                }
                inner.template = false;
                if let Some(body) = node.child_by_field_name("body") {
                    self.items(body, &inner);
                }
            }
            "linkage_specification" => {
                if let Some(body) = node.child_by_field_name("body") {
                    if body.kind() == "declaration_list" {
                        self.items(body, scope);
                    } else {
                        self.item(body, body, scope);
                    }
                }
            }
            "preproc_ifdef" | "preproc_if" | "preproc_else" | "preproc_elif" | "preproc_elifdef" => {
                self.items(node, scope);
            }
            "template_declaration" => {
                let mut inner = scope.clone();
                inner.template = true;
                for child in named_children(node) {
                    match child.kind() {
                        "function_definition"
                        | "declaration"
                        | "field_declaration"
                        | "class_specifier"
                        | "struct_specifier"
                        | "template_declaration" => {
                            self.item(child, anchor, &mut inner);
                        }
                        _ => {}
                    }
                }
            }
            "access_specifier" => {
                if let Some(class) = scope.class.as_mut() {
                    class.access = match self.text(node).trim() {
                        "public" => Access::Public,
                        "protected" => Access::Protected,
                        _ => Access::Private,
                    };
                }
            }
            "function_definition" => {
                let Some(declarator) = node.child_by_field_name("declarator") else {
                    return;
                };
                match function_declarator(declarator) {
                    Some(fd) => self.function(node, fd, anchor, scope, true),
                    None => log::debug!(
                        "{}:{}: definition without a function declarator (macro?), skipped",
                        self.path,
                        row(node)
                    ),
                }
            }
            "declaration" | "field_declaration" => {
                if let Some(ty) = node.child_by_field_name("type") {
                    if matches!(ty.kind(), "class_specifier" | "struct_specifier") {
                        self.class(ty, scope);
                    }
                }
                let mut cursor = node.walk();
                let declarators: Vec<Node> = node.children_by_field_name("declarator", &mut cursor).collect();
                for d in declarators {
                    if let Some(fd) = function_declarator(d) {
                        self.function(node, fd, anchor, scope, false);
                    } else if node.kind() == "field_declaration" {
                        self.field(node, d, scope);
                    }
                }
            }
            "class_specifier" | "struct_specifier" => self.class(node, scope),
            _ => {}
        }
    }

    fn class(&mut self, node: Node, scope: &Scope) {
        let (Some(name), Some(body)) = (node.child_by_field_name("name"), node.child_by_field_name("body")) else {
            return;
        };
        let Some(simple) = split_scope(self.text(name)).pop() else {
            return;
        };
        let kind = if node.kind() == "struct_specifier" {
            ClassKind::Struct
        } else {
            ClassKind::Class
        };
        let mut path = scope.class.as_ref().map(|c| c.path.clone()).unwrap_or_default();
        path.push(simple);
        let inner = Scope {
            namespaces: scope.namespaces.clone(),
            class: Some(ClassScope {
                path: path.clone(),
                access: if kind == ClassKind::Struct {
                    Access::Public
                } else {
                    Access::Private
                },
            }),
            template: false,
        };
        let mut qualified: Vec<String> = scope.namespaces.clone();
        qualified.extend(path.iter().cloned());
        let qualified = qualified.join("::");
        let index = self.classes.len();
        self.classes.push(ClassRecord {
            qualified_name: qualified.clone(),
            kind,
            public_methods: Vec::new(),
            constructors: Vec::new(),
            member_fields: Vec::new(),
            line_span: span(node),
        });
        let first_fn = self.functions.len();
        self.items(body, &inner);
        let mut public_methods = Vec::new();
        let mut constructors = Vec::new();
        for f in &self.functions[first_fn..] {
            if f.scope_path() != qualified {
                continue;
            }
            match f.member_kind {
                MemberKind::Constructor => constructors.push(f.signature_text.clone()),
                MemberKind::Function if f.access == Access::Public && !public_methods.contains(&f.qualified_name) => {
                    public_methods.push(f.qualified_name.clone());
                }
                _ => {}
            }
        }
        let record = &mut self.classes[index];
        record.public_methods = public_methods;
        record.constructors = constructors;
    }

    fn field(&mut self, node: Node, declarator: Node, scope: &Scope) {
        let Some(class) = &scope.class else {
            return;
        };
        let Some(name) = declarator_name(declarator) else {
            return;
        };
        let type_text = self.type_without_name(node, name, node.child_by_field_name("default_value"));
        let type_text = strip_trailing(&type_text, ';');
        let mut qualified = scope.namespaces.clone();
        qualified.extend(class.path.iter().cloned());
        let qualified = qualified.join("::");
        let field = MemberField {
            name: self.text(name).to_string(),
            type_text: normalize_type(&strip_specifiers(&type_text)),
            access: class.access,
        };
        if let Some(c) = self.classes.iter_mut().rev().find(|c| c.qualified_name == qualified) {
            c.member_fields.push(field);
        }
    }

    /// Spelling of `whole` with the `name` node (and any default value) removed.
    fn type_without_name(&self, whole: Node, name: Node, default: Option<Node>) -> String {
        let end = match default {
            Some(d) => {
                // Cut at the `=` (or `{`) that introduces the default.
                let before = &self.src[whole.start_byte()..d.start_byte()];
                whole.start_byte() + before.trim_end().trim_end_matches('=').len()
            }
            None => whole.end_byte(),
        };
        let mut s = String::new();
        s.push_str(&self.src[whole.start_byte()..name.start_byte()]);
        s.push(' ');
        if name.end_byte() < end {
            s.push_str(&self.src[name.end_byte()..end]);
        }
        s
    }

    fn function(&mut self, node: Node, fd: Node, anchor: Node, scope: &Scope, allow_body: bool) {
        let Some(name_node) = fd.child_by_field_name("declarator") else {
            return;
        };
        let mut segments = match name_node.kind() {
            "operator_name" | "destructor_name" => vec![self.text(name_node).split_whitespace().collect::<String>()],
            _ => split_scope(self.text(name_node)),
        };
        if name_node.kind() == "qualified_identifier" {
            // Operators and destructors keep their own spelling as the last segment.
            if let Some(last) = innermost_name(name_node) {
                if matches!(last.kind(), "operator_name" | "destructor_name") {
                    segments.pop();
                    segments.push(self.text(last).split_whitespace().collect());
                }
            }
        }
        let Some(simple) = segments.pop() else {
            return;
        };
        let qualifier = segments;

        let mut namespaces = scope.namespaces.clone();
        let mut class_path: Vec<String> = scope.class.as_ref().map(|c| c.path.clone()).unwrap_or_default();
        if scope.class.is_some() {
            class_path.extend(qualifier);
        } else {
            let split = qualifier
                .iter()
                .take_while(|s| self.namespaces.contains(*s) && !self.class_names.contains(*s))
                .count();
            namespaces.extend(qualifier[..split].iter().cloned());
            class_path.extend(qualifier[split..].iter().cloned());
        }

        let access = match (&scope.class, class_path.is_empty()) {
            (Some(c), _) => c.access,
            (None, true) => Access::Free,
            (None, false) => Access::Public,
        };
        let member_kind = if simple.starts_with('~') {
            MemberKind::Destructor
        } else if class_path.last() == Some(&simple) {
            MemberKind::Constructor
        } else {
            MemberKind::Function
        };

        let params = fd
            .child_by_field_name("parameters")
            .map(|p| self.params(p))
            .unwrap_or_default();
        let is_const = named_children(fd)
            .iter()
            .any(|c| c.kind() == "type_qualifier" && self.text(*c) == "const");

        let mut qualified: Vec<String> = namespaces.clone();
        qualified.extend(class_path.iter().cloned());
        qualified.push(simple.clone());
        let mut qualified_name = format!(
            "{}({})",
            qualified.join("::"),
            params
                .iter()
                .map(|p| p.type_text.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
        if is_const {
            qualified_name.push_str(" const");
        }

        let body = if allow_body {
            node.child_by_field_name("body")
        } else {
            None
        };
        let is_definition = body.is_some();
        if !is_definition
            && self
                .functions
                .iter()
                .any(|f| !f.is_definition && f.qualified_name == qualified_name)
        {
            return;
        }

        let signature_text = self.src[node.start_byte()..fd.end_byte()].trim().to_string();
        let return_type = normalize_type(&strip_specifiers(&self.src[node.start_byte()..fd.start_byte()]));

        let (branch_count, body_text, calls, guarded_blocks) = if is_definition {
            let mut calls = Vec::new();
            self.calls(node, &mut calls);
            let mut blocks = Vec::new();
            if let Some(b) = body {
                guarded(b, &mut blocks);
            }
            (count_branches(node), self.text(node).to_string(), calls, blocks)
        } else {
            (0, String::new(), Vec::new(), Vec::new())
        };

        self.functions.push(FunctionRecord {
            simple_name: simple,
            qualified_name,
            namespace_path: namespaces,
            class_name: if class_path.is_empty() {
                None
            } else {
                Some(class_path.join("::"))
            },
            access,
            member_kind,
            signature_text,
            params,
            return_type,
            line_span: span(node),
            has_branches: branch_count > 0,
            branch_count,
            is_definition,
            is_template: scope.template,
            doc: doc_for_node(anchor, self.src),
            body_text,
            calls,
            guarded_blocks,
        });
    }

    fn params(&self, list: Node) -> Vec<Param> {
        let mut out = Vec::new();
        for p in named_children(list) {
            match p.kind() {
                "parameter_declaration" | "optional_parameter_declaration" => {
                    let default = p.child_by_field_name("default_value");
                    let name = p.child_by_field_name("declarator").and_then(declarator_name);
                    let type_text = match name {
                        Some(n) => self.type_without_name(p, n, default),
                        None => match default {
                            Some(d) => self.src[p.start_byte()..d.start_byte()]
                                .trim_end()
                                .trim_end_matches('=')
                                .to_string(),
                            None => self.text(p).to_string(),
                        },
                    };
                    out.push(Param {
                        name: name.map(|n| self.text(n).to_string()).unwrap_or_default(),
                        type_text: normalize_type(&type_text),
                    });
                }
                "variadic_parameter_declaration" => out.push(Param {
                    name: String::new(),
                    type_text: normalize_type(self.text(p)),
                }),
                "variadic_parameter" => out.push(Param {
                    name: String::new(),
                    type_text: "...".to_string(),
                }),
                _ => {}
            }
        }
        if out.len() == 1 && out[0].name.is_empty() && out[0].type_text == "void" {
            out.clear();
        }
        out
    }

    fn calls(&self, node: Node, out: &mut Vec<CallSite>) {
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            if n.kind() == "call_expression" {
                if let Some(f) = n.child_by_field_name("function") {
                    let site = match f.kind() {
                        "identifier" | "qualified_identifier" | "template_function" => {
                            Some((split_scope(&strip_template_args(self.text(f))).join("::"), false))
                        }
                        "field_expression" => f
                            .child_by_field_name("field")
                            .map(|field| (strip_template_args(self.text(field)), true)),
                        _ => None,
                    };
                    if let Some((callee, member)) = site {
                        let last = callee.rsplit("::").next().unwrap_or("");
                        if !callee.is_empty() && !NOT_CALLS.contains(&last) {
                            out.push(CallSite {
                                callee,
                                line: row(n),
                                member,
                            });
                        }
                    }
                }
            }
            stack.extend(named_children(n));
        }
        out.sort_by(|a, b| (a.line, &a.callee).cmp(&(b.line, &b.callee)));
    }

    /// Fill in access for out-of-line definitions of classes declared in this unit.
    fn link_local(&mut self) {
        let declared: Vec<(String, Access)> = self
            .functions
            .iter()
            .filter(|f| f.access != Access::Free)
            .map(|f| (f.qualified_name.clone(), f.access))
            .collect();
        let classes: BTreeSet<String> = self.classes.iter().map(|c| c.qualified_name.clone()).collect();
        for f in self.functions.iter_mut() {
            if f.access == Access::Public && classes.contains(&f.scope_path()) {
                if let Some((_, a)) = declared.iter().find(|(q, _)| q == &f.qualified_name) {
                    f.access = *a;
                }
            }
        }
    }
}

/// Innermost `function_declarator` that names a function (not a pointer to one).
fn function_declarator(d: Node) -> Option<Node> {
    match d.kind() {
        "function_declarator" => {
            let inner = d.child_by_field_name("declarator")?;
            match inner.kind() {
                "identifier"
                | "field_identifier"
                | "qualified_identifier"
                | "destructor_name"
                | "operator_name"
                | "template_function"
                | "operator_cast" => Some(d),
                _ => None,
            }
        }
        "pointer_declarator" | "reference_declarator" | "attributed_declarator" => {
            let mut cursor = d.walk();
            let children: Vec<Node> = d.named_children(&mut cursor).collect();
            children.into_iter().find_map(function_declarator)
        }
        _ => None,
    }
}

fn innermost_name(n: Node) -> Option<Node> {
    let mut cur = n;
    while cur.kind() == "qualified_identifier" {
        cur = cur.child_by_field_name("name")?;
    }
    Some(cur)
}

/// Identifier declared by a (possibly wrapped) declarator.
fn declarator_name(d: Node) -> Option<Node> {
    match d.kind() {
        "identifier" | "field_identifier" => Some(d),
        "parameter_list" | "function_declarator" => None,
        _ => {
            let mut cursor = d.walk();
            let children: Vec<Node> = d.named_children(&mut cursor).collect();
            children.into_iter().find_map(declarator_name)
        }
    }
}

fn guarded(body: Node, out: &mut Vec<GuardedBlock>) {
    let mut stack = vec![body];
    let mut found = Vec::new();
    while let Some(n) = stack.pop() {
        let target = match n.kind() {
            "if_statement" => n.child_by_field_name("consequence").map(|c| (BlockKind::IfBody, c)),
            "catch_clause" => n.child_by_field_name("body").map(|c| (BlockKind::CatchBody, c)),
            _ => None,
        };
        if let Some((kind, block)) = target {
            if let Some(s) = inner_span(block) {
                found.push(GuardedBlock { kind, span: s });
            }
        }
        stack.extend(named_children(n));
    }
    found.sort_by_key(|b| (b.span, b.kind == BlockKind::CatchBody));
    out.extend(found);
}

/// Lines of the statements inside a block, or of a single statement.
fn inner_span(block: Node) -> Option<LineSpan> {
    if block.kind() != "compound_statement" {
        return Some(span(block));
    }
    let stmts: Vec<Node> = named_children(block)
        .into_iter()
        .filter(|c| c.kind() != "comment")
        .collect();
    let first = stmts.first()?;
    let last = stmts.last()?;
    Some(LineSpan::new(row(*first), end_row(*last)))
}

fn strip_specifiers(text: &str) -> String {
    let mut s = text.to_string();
    while let Some(start) = s.find("[[") {
        match s[start..].find("]]") {
            Some(end) => s.replace_range(start..start + end + 2, " "),
            None => break,
        }
    }
    s.split_whitespace()
        .filter(|w| !SPECIFIER_WORDS.contains(w))
        .collect::<Vec<_>>()
        .join(" ")
}

fn strip_trailing(text: &str, c: char) -> String {
    text.trim().trim_end_matches(c).trim().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_branched_function() {
        let u = parse_unit("a.cpp", "namespace a { int f(int x){ if(x>0) return 1; return 0; } }");
        assert!(u.parse_ok);
        assert_eq!(u.functions.len(), 1);
        let f = &u.functions[0];
        assert_eq!(f.qualified_name, "a::f(int)");
        assert!(f.has_branches);
        assert_eq!(f.branch_count, 1);
        assert_eq!(f.access, Access::Free);
        assert_eq!(f.params[0].name, "x");
    }

    #[test]
    fn empty_file_is_ok() {
        let u = parse_unit("e.cpp", "");
        assert!(u.parse_ok);
        assert!(u.functions.is_empty());
        assert_eq!(u.line_count, 0);
    }

    #[test]
    fn syntax_error_clears_records_but_keeps_includes() {
        let u = parse_unit(
            "b.cpp",
            "#include <vector>\nint f(int x) { return x; }\nint broken( {\n",
        );
        assert!(!u.parse_ok);
        assert!(u.functions.is_empty());
        assert_eq!(u.includes.len(), 1);
    }

    #[test]
    fn includes_keep_order_and_form() {
        let u = parse_unit("c.cpp", "#include \"a/b.hpp\"\n#ifndef X\n#include <vector>\n#endif\n");
        let got: Vec<String> = u.includes.iter().map(Include::directive).collect();
        assert_eq!(got, vec!["#include \"a/b.hpp\"", "#include <vector>"]);
    }

    #[test]
    fn class_members_and_access() {
        let src = r#"
namespace n {
class C {
public:
  explicit C(std::size_t cap);
  int get(int i = 0) const;
  bool empty() const { return v_.empty(); }
protected:
  double p() const;
private:
  int q(const std::vector<double> & xs, char ** argv);
  std::vector<int> v_;
  int count_ = 0;
};
}"#;
        let u = parse_unit("c.hpp", src);
        let names: Vec<(&str, Access)> = u
            .functions
            .iter()
            .map(|f| (f.qualified_name.as_str(), f.access))
            .collect();
        assert_eq!(
            names,
            vec![
                ("n::C::C(std::size_t)", Access::Public),
                ("n::C::get(int) const", Access::Public),
                ("n::C::empty() const", Access::Public),
                ("n::C::p() const", Access::Protected),
                ("n::C::q(const std::vector<double>&, char**)", Access::Private),
            ]
        );
        let c = &u.classes[0];
        assert_eq!(c.qualified_name, "n::C");
        assert_eq!(c.public_methods, vec!["n::C::get(int) const", "n::C::empty() const"]);
        assert_eq!(c.constructors, vec!["explicit C(std::size_t cap)"]);
        let fields: Vec<(&str, &str)> = c
            .member_fields
            .iter()
            .map(|m| (m.name.as_str(), m.type_text.as_str()))
            .collect();
        assert_eq!(fields, vec![("v_", "std::vector<int>"), ("count_", "int")]);
        assert_eq!(u.functions[0].member_kind, MemberKind::Constructor);
        assert!(u.functions[2].is_definition);
        assert!(!u.functions[1].is_definition);
    }

    #[test]
    fn out_of_line_method_and_anonymous_namespace() {
        let src = r#"
namespace ns {
namespace {
double sq(double v) { return v * v; }
}
class K { public: int m(int) const; };
int K::m(int v) const { return v > 0 ? sq(v) : -1; }
}"#;
        let u = parse_unit("k.cpp", src);
        let sq = &u.functions[0];
        assert_eq!(sq.qualified_name, "ns::(anonymous namespace)::sq(double)");
        assert_eq!(sq.namespace().as_deref(), Some("ns"));
        let def = u
            .functions
            .iter()
            .find(|f| f.is_definition && f.simple_name == "m")
            .unwrap();
        assert_eq!(def.class_name.as_deref(), Some("K"));
        assert_eq!(def.qualified_name, "ns::K::m(int) const");
        assert_eq!(
            def.calls.iter().map(|c| c.callee.as_str()).collect::<Vec<_>>(),
            vec!["sq"]
        );
        assert_eq!(def.return_type, "int");
    }

    #[test]
    fn template_recorded_once_with_flag() {
        let u = parse_unit(
            "t.hpp",
            "template <typename T>\nT clampValue(T v, T lo, T hi)\n{\n  return v < lo ? lo : v;\n}\n",
        );
        assert_eq!(u.functions.len(), 1);
        let f = &u.functions[0];
        assert!(f.is_template);
        assert_eq!(f.qualified_name, "clampValue(T, T, T)");
        assert_eq!(f.line_span, LineSpan::new(2, 5));
    }

    #[test]
    fn default_arguments_and_unnamed_params() {
        let u = parse_unit("d.cpp", "void f(int a = 3, const std::string & = \"x\", double);");
        let f = &u.functions[0];
        assert_eq!(f.qualified_name, "f(int, const std::string&, double)");
        assert_eq!(f.params[1].name, "");
    }

    #[test]
    fn void_parameter_list_is_empty() {
        let u = parse_unit("v.cpp", "int f(void) { return 1; }");
        assert!(u.functions[0].params.is_empty());
    }

    #[test]
    fn member_calls_and_casts() {
        let u = parse_unit(
            "m.cpp",
            "int f(std::vector<int> & v) { v.push_back(1); return static_cast<int>(ns::g<int>(v.size())); }",
        );
        let calls: Vec<(String, bool)> = u.functions[0]
            .calls
            .iter()
            .map(|c| (c.callee.clone(), c.member))
            .collect();
        assert!(calls.contains(&("push_back".into(), true)));
        assert!(calls.contains(&("ns::g".into(), false)));
        assert!(calls.contains(&("size".into(), true)));
        assert!(!calls.iter().any(|(c, _)| c == "static_cast"));
    }

    #[test]
    fn guarded_blocks_cover_if_and_catch_bodies() {
        let src = "int f(int x)\n{\n  if (x) {\n    x = 2;\n  }\n  try {\n    g();\n  } catch (...) {\n    return -1;\n  }\n  return x;\n}\n";
        let u = parse_unit("g.cpp", src);
        let blocks = &u.functions[0].guarded_blocks;
        assert_eq!(
            blocks,
            &vec![
                GuardedBlock {
                    kind: BlockKind::IfBody,
                    span: LineSpan::new(4, 4)
                },
                GuardedBlock {
                    kind: BlockKind::CatchBody,
                    span: LineSpan::new(9, 9)
                },
            ]
        );
    }
}
