//! Canonical pretty-printer. Output is not byte-identical to the parsed
//! input but re-parses to a structurally equal tree.

use std::collections::HashMap;

use super::ast::{Ast, CommentSide, NodeId, NodeKind};
use super::parser::binary_precedence;

const INDENT: &str = "  ";

const PREC_ASSIGN: u8 = 1;
const PREC_UNARY: u8 = 14;
const PREC_POSTFIX: u8 = 15;
const PREC_PRIMARY: u8 = 16;

/// Renders `ast` as source text.
pub fn render(ast: &Ast) -> String {
    let mut r = Renderer { ast, out: String::new(), before: HashMap::new(), after: HashMap::new() };
    for c in &ast.comments {
        let map = match c.side {
            CommentSide::Before => &mut r.before,
            CommentSide::After => &mut r.after,
        };
        map.entry(c.anchor).or_insert_with(Vec::new).push(c.text.as_str());
    }
    r.translation_unit();
    r.out
}

/// Renders a single expression subtree.
pub fn render_expr(ast: &Ast, id: NodeId) -> String {
    let r = Renderer { ast, out: String::new(), before: HashMap::new(), after: HashMap::new() };
    r.expr(id, 0)
}

struct Renderer<'a> {
    ast: &'a Ast,
    out: String,
    before: HashMap<NodeId, Vec<&'a str>>,
    after: HashMap<NodeId, Vec<&'a str>>,
}

impl<'a> Renderer<'a> {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str(INDENT);
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn leading_comments(&mut self, id: NodeId, depth: usize) {
        if let Some(cs) = self.before.get(&id).cloned() {
            for c in cs {
                self.line(depth, c);
            }
        }
    }

    /// Appends trailing comments of `id` to the line just written.
    fn trailing_comments(&mut self, id: NodeId) {
        if let Some(cs) = self.after.get(&id).cloned() {
            debug_assert!(self.out.ends_with('\n'));
            self.out.pop();
            for c in cs {
                self.out.push(' ');
                self.out.push_str(c);
                if c.starts_with("//") {
                    // a line comment swallows the rest of the line
                    self.out.push('\n');
                    self.out.push_str(INDENT);
                }
            }
            while self.out.ends_with(' ') {
                self.out.pop();
            }
            if !self.out.ends_with('\n') {
                self.out.push('\n');
            }
        }
    }

    fn translation_unit(&mut self) {
        let root = self.ast.root;
        // (is directive, is function definition) of the previous item
        let mut prev: Option<(bool, bool)> = None;
        for &item in self.ast.children(root) {
            let kind = self.ast.kind(item);
            let is_directive = matches!(kind, NodeKind::Include | NodeKind::MacroDefine);
            let is_definition = kind == NodeKind::FunctionDef && self.ast.function_body(item).is_some();
            if let Some((prev_directive, prev_definition)) = prev {
                if is_definition || prev_definition || prev_directive != is_directive {
                    self.out.push('\n');
                }
            }
            if kind.is_statement() {
                self.statement(item, 0);
            } else {
                self.leading_comments(item, 0);
                match kind {
                    NodeKind::Include => self.line(0, &format!("#include {}", self.ast.node(item).text)),
                    NodeKind::MacroDefine => self.line(0, &format!("#define {}", self.ast.node(item).text)),
                    _ => self.function(item),
                }
                self.trailing_comments(item);
            }
            prev = Some((is_directive, is_definition));
        }
        if let Some(cs) = self.after.get(&root).cloned() {
            for c in cs {
                self.line(0, c);
            }
        }
    }

    fn function(&mut self, id: NodeId) {
        let ast = self.ast;
        let name = ast.declared_name(id).unwrap_or_default();
        let params: Vec<String> = ast.function_params(id).into_iter().map(|p| self.param(p)).collect();
        let head = format!("{} {}({})", ast.node(id).ty, name, params.join(", "));
        match ast.function_body(id) {
            None => self.line(0, &format!("{head};")),
            Some(body) => {
                self.line(0, &format!("{head} {{"));
                self.block_items(body, 1);
                self.line(0, "}");
            }
        }
    }

    fn param(&self, id: NodeId) -> String {
        let ast = self.ast;
        let mut s = ast.node(id).ty.clone();
        if let Some(name) = ast.declared_name(id) {
            s.push(' ');
            s.push_str(name);
        }
        s.push_str(&self.dims(id));
        s
    }

    fn dims(&self, id: NodeId) -> String {
        self.ast
            .decl_dims(id)
            .iter()
            .map(|d| if self.ast.kind(*d) == NodeKind::Empty { "[]".to_string() } else { format!("[{}]", self.expr(*d, 0)) })
            .collect()
    }

    fn decl_text(&self, id: NodeId) -> String {
        let ast = self.ast;
        let mut s = format!("{} {}{}", ast.node(id).ty, ast.declared_name(id).unwrap_or_default(), self.dims(id));
        if let Some(init) = ast.decl_init(id) {
            s.push_str(" = ");
            s.push_str(&self.expr(init, PREC_ASSIGN));
        }
        s
    }

    /// Body of a function or control statement. The block has no line of its
    /// own, so comments anchored on it go inside.
    fn block_items(&mut self, block: NodeId, depth: usize) {
        self.leading_comments(block, depth);
        self.items(block, depth);
        if let Some(cs) = self.after.get(&block).cloned() {
            for c in cs {
                self.line(depth, c);
            }
        }
    }

    fn items(&mut self, block: NodeId, depth: usize) {
        for &s in self.ast.children(block) {
            self.statement(s, depth);
        }
    }

    /// `else { if ... }` collapses to `else if ...` when nothing would be lost.
    fn collapsible_else(&self, block: NodeId) -> Option<NodeId> {
        let items = self.ast.children(block);
        if items.len() == 1
            && self.ast.kind(items[0]) == NodeKind::If
            && !self.before.contains_key(&block)
            && !self.after.contains_key(&block)
        {
            Some(items[0])
        } else {
            None
        }
    }

    fn statement(&mut self, id: NodeId, depth: usize) {
        let ast = self.ast;
        self.leading_comments(id, depth);
        let node = ast.node(id);
        match node.kind {
            NodeKind::Decl => self.line(depth, &format!("{};", self.decl_text(id))),
            NodeKind::ExprStmt => self.line(depth, &format!("{};", self.expr(node.children[0], 0))),
            NodeKind::Empty => self.line(depth, ";"),
            NodeKind::Break => self.line(depth, "break;"),
            NodeKind::Continue => self.line(depth, "continue;"),
            NodeKind::Return => match node.children.first() {
                Some(e) => self.line(depth, &format!("return {};", self.expr(*e, 0))),
                None => self.line(depth, "return;"),
            },
            NodeKind::Block => {
                self.line(depth, "{");
                self.items(id, depth + 1);
                self.line(depth, "}");
            }
            NodeKind::While => {
                self.line(depth, &format!("while ({}) {{", self.expr(node.children[0], 0)));
                self.block_items(node.children[1], depth + 1);
                self.line(depth, "}");
            }
            NodeKind::For => {
                let init = match ast.kind(node.children[0]) {
                    NodeKind::Empty => String::new(),
                    NodeKind::Decl => self.decl_text(node.children[0]),
                    _ => self.expr(node.children[0], 0),
                };
                let mut head = format!("for ({init};");
                for part in [node.children[1], node.children[2]] {
                    if ast.kind(part) != NodeKind::Empty {
                        head.push(' ');
                        head.push_str(&self.expr(part, 0));
                    }
                    if part == node.children[1] {
                        head.push(';');
                    }
                }
                self.line(depth, &format!("{head}) {{"));
                self.block_items(node.children[3], depth + 1);
                self.line(depth, "}");
            }
            NodeKind::If => self.if_chain(id, depth, false),
            other => self.line(depth, &format!("/* unexpected {other} */")),
        }
        self.trailing_comments(id);
    }

    fn if_chain(&mut self, id: NodeId, depth: usize, is_else_if: bool) {
        let ast = self.ast;
        let ch = ast.children(id);
        let head = format!("if ({}) {{", self.expr(ch[0], 0));
        if is_else_if {
            // continue the `} else ` already written
            self.out.push_str(&head);
            self.out.push('\n');
        } else {
            self.line(depth, &head);
        }
        self.block_items(ch[1], depth + 1);
        match ch.get(2) {
            None => self.line(depth, "}"),
            Some(&els) => match self.collapsible_else(els) {
                Some(inner) if !self.before.contains_key(&inner) && !self.after.contains_key(&inner) => {
                    for _ in 0..depth {
                        self.out.push_str(INDENT);
                    }
                    self.out.push_str("} else ");
                    self.if_chain(inner, depth, true);
                }
                _ => {
                    self.line(depth, "} else {");
                    self.block_items(els, depth + 1);
                    self.line(depth, "}");
                    self.trailing_comments(els);
                }
            },
        }
    }

    fn precedence(&self, id: NodeId) -> u8 {
        let n = self.ast.node(id);
        match n.kind {
            NodeKind::Assign => PREC_ASSIGN,
            NodeKind::BinaryOp => match n.text.as_str() {
                "[]" | "." | "->" => PREC_POSTFIX,
                op => binary_precedence(op).unwrap_or(PREC_PRIMARY),
            },
            NodeKind::UnaryOp if n.text.starts_with("post") => PREC_POSTFIX,
            NodeKind::UnaryOp => PREC_UNARY,
            NodeKind::Call => PREC_POSTFIX,
            _ => PREC_PRIMARY,
        }
    }

    fn expr(&self, id: NodeId, min_prec: u8) -> String {
        let prec = self.precedence(id);
        let s = self.expr_inner(id, prec);
        if prec < min_prec {
            format!("({s})")
        } else {
            s
        }
    }

    fn expr_inner(&self, id: NodeId, prec: u8) -> String {
        let ast = self.ast;
        let n = ast.node(id);
        match n.kind {
            NodeKind::Identifier | NodeKind::Literal => n.text.clone(),
            NodeKind::Empty => String::new(),
            NodeKind::Assign => {
                format!("{} {} {}", self.expr(n.children[0], PREC_UNARY), n.text, self.expr(n.children[1], PREC_ASSIGN))
            }
            NodeKind::BinaryOp => match n.text.as_str() {
                "[]" => format!("{}[{}]", self.expr(n.children[0], PREC_POSTFIX), self.expr(n.children[1], 0)),
                "." | "->" => format!("{}{}{}", self.expr(n.children[0], PREC_POSTFIX), n.text, self.expr(n.children[1], PREC_PRIMARY)),
                op => format!("{} {} {}", self.expr(n.children[0], prec), op, self.expr(n.children[1], prec + 1)),
            },
            NodeKind::UnaryOp => {
                if let Some(op) = n.text.strip_prefix("post") {
                    format!("{}{}", self.expr(n.children[0], PREC_POSTFIX), op)
                } else {
                    let operand = self.expr(n.children[0], PREC_UNARY);
                    // keep `- -x` from lexing as `--x`
                    let last = n.text.chars().last().unwrap_or(' ');
                    if matches!(last, '+' | '-' | '&') && operand.starts_with(last) {
                        format!("{} {}", n.text, operand)
                    } else {
                        format!("{}{}", n.text, operand)
                    }
                }
            }
            NodeKind::Call => {
                let args: Vec<String> = n.children[1..].iter().map(|a| self.expr(*a, PREC_ASSIGN)).collect();
                format!("{}({})", self.expr(n.children[0], PREC_PRIMARY), args.join(", "))
            }
            other => format!("/* {other} */"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_source;

    fn round_trip(src: &str) -> String {
        let a = parse_source(src).unwrap();
        let text = render(&a);
        let b = parse_source(&text).unwrap_or_else(|e| panic!("re-parse failed: {e}\n{text}"));
        assert!(a.structurally_equal(&b), "structure changed:\n{text}");
        assert_eq!(a.comments.len(), b.comments.len(), "comments lost:\n{text}");
        text
    }

    #[test]
    fn minimal_round_trip() {
        let text = round_trip("int main(void){return 0;}");
        assert_eq!(text, "int main() {\n  return 0;\n}\n");
    }

    #[test]
    fn single_declaration() {
        let text = round_trip("int x;");
        assert_eq!(text.matches(';').count(), 1);
        assert!(text.contains("int x;"));
    }

    #[test]
    fn parenthesization_preserves_structure() {
        round_trip("int main(){ x = (a + b) * c; y = a - (b - c); z = !(a < b); w = - -a; v = a[i + 1]++; q = (x = 3); }");
    }

    #[test]
    fn else_if_chain_and_comments() {
        let text = round_trip(
            "int f(int a){ /* lead */ if (a < 0) { return -1; } else if (a == 0) return 0; else { return 1; } // tail\n }",
        );
        assert!(text.contains("} else if (a == 0) {"));
    }

    #[test]
    fn for_header_forms() {
        let text = round_trip("int main(){ for(;;){} for(int i=0;i<3;++i){} for(; s < d;){ } }");
        assert!(text.contains("for (;;) {"));
        assert!(text.contains("for (int i = 0; i < 3; ++i) {"));
        assert!(text.contains("for (; s < d;) {"));
    }

    #[test]
    fn empty_block_comment_survives() {
        round_trip("int main(){ while (x) { /* nothing */ } return 0; }");
    }

    #[test]
    fn prototypes_and_globals() {
        round_trip("#include <stdio.h>\n#define N 10\nint g = 3;\nint f(int, char* s);\nint f(int a, char* s){ return a; }\nint arr[N];\n");
    }
}
