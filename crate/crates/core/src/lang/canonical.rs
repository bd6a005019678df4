//! Structural token streams in the style of JPlag: one symbol per structural
//! event, with identifiers, literals and comments erased.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Ast, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CanonicalToken {
    BeginFunc,
    EndFunc,
    BeginWhile,
    EndWhile,
    BeginFor,
    EndFor,
    BeginIf,
    Else,
    EndIf,
    Decl,
    Assign,
    Call,
    Return,
    Expr,
}

impl CanonicalToken {
    pub const ALL: [CanonicalToken; 14] = [
        CanonicalToken::BeginFunc,
        CanonicalToken::EndFunc,
        CanonicalToken::BeginWhile,
        CanonicalToken::EndWhile,
        CanonicalToken::BeginFor,
        CanonicalToken::EndFor,
        CanonicalToken::BeginIf,
        CanonicalToken::Else,
        CanonicalToken::EndIf,
        CanonicalToken::Decl,
        CanonicalToken::Assign,
        CanonicalToken::Call,
        CanonicalToken::Return,
        CanonicalToken::Expr,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            CanonicalToken::BeginFunc => "BEGIN_FUNC",
            CanonicalToken::EndFunc => "END_FUNC",
            CanonicalToken::BeginWhile => "BEGIN_WHILE",
            CanonicalToken::EndWhile => "END_WHILE",
            CanonicalToken::BeginFor => "BEGIN_FOR",
            CanonicalToken::EndFor => "END_FOR",
            CanonicalToken::BeginIf => "BEGIN_IF",
            CanonicalToken::Else => "ELSE",
            CanonicalToken::EndIf => "END_IF",
            CanonicalToken::Decl => "DECL",
            CanonicalToken::Assign => "ASSIGN",
            CanonicalToken::Call => "CALL",
            CanonicalToken::Return => "RETURN",
            CanonicalToken::Expr => "EXPR",
        }
    }
}

impl fmt::Display for CanonicalToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Maps a tree to its canonical stream.
///
/// Function definitions are bracketed by `BEGIN_FUNC`/`END_FUNC`; prototypes,
/// includes and macro definitions emit nothing. An expression statement
/// emits `ASSIGN`, `CALL` or `EXPR` depending on its outermost operator, and
/// every call nested inside any expression adds one more `CALL`.
pub fn canonical_tokens(ast: &Ast) -> Vec<CanonicalToken> {
    let mut out = Vec::new();
    walk(ast, ast.root, &mut out);
    out
}

fn walk(ast: &Ast, id: NodeId, out: &mut Vec<CanonicalToken>) {
    let ch = ast.children(id);
    match ast.kind(id) {
        NodeKind::TranslationUnit | NodeKind::Block => {
            for &c in ch {
                walk(ast, c, out);
            }
        }
        NodeKind::FunctionDef => {
            if let Some(body) = ast.function_body(id) {
                out.push(CanonicalToken::BeginFunc);
                walk(ast, body, out);
                out.push(CanonicalToken::EndFunc);
            }
        }
        NodeKind::Decl => {
            out.push(CanonicalToken::Decl);
            if let Some(init) = ast.decl_init(id) {
                nested_calls(ast, init, out);
            }
        }
        NodeKind::ExprStmt => {
            if let Some(&e) = ch.first() {
                expression_statement(ast, e, out);
            }
        }
        NodeKind::Return => {
            out.push(CanonicalToken::Return);
            for &c in ch {
                nested_calls(ast, c, out);
            }
        }
        NodeKind::If => {
            out.push(CanonicalToken::BeginIf);
            nested_calls(ast, ch[0], out);
            walk(ast, ch[1], out);
            if let Some(&els) = ch.get(2) {
                out.push(CanonicalToken::Else);
                walk(ast, els, out);
            }
            out.push(CanonicalToken::EndIf);
        }
        NodeKind::While => {
            out.push(CanonicalToken::BeginWhile);
            nested_calls(ast, ch[0], out);
            walk(ast, ch[1], out);
            out.push(CanonicalToken::EndWhile);
        }
        NodeKind::For => {
            out.push(CanonicalToken::BeginFor);
            match ast.kind(ch[0]) {
                NodeKind::Empty => {}
                NodeKind::Decl => walk(ast, ch[0], out),
                _ => expression_statement(ast, ch[0], out),
            }
            nested_calls(ast, ch[1], out);
            walk(ast, ch[3], out);
            if ast.kind(ch[2]) != NodeKind::Empty {
                expression_statement(ast, ch[2], out);
            }
            out.push(CanonicalToken::EndFor);
        }
        _ => {}
    }
}

fn expression_statement(ast: &Ast, e: NodeId, out: &mut Vec<CanonicalToken>) {
    match ast.kind(e) {
        NodeKind::Assign => {
            out.push(CanonicalToken::Assign);
            nested_calls(ast, e, out);
        }
        NodeKind::Call => {
            out.push(CanonicalToken::Call);
            for &c in &ast.children(e)[1..] {
                nested_calls(ast, c, out);
            }
        }
        _ => {
            out.push(CanonicalToken::Expr);
            nested_calls(ast, e, out);
        }
    }
}

fn nested_calls(ast: &Ast, e: NodeId, out: &mut Vec<CanonicalToken>) {
    for n in ast.preorder_from(e) {
        if ast.kind(n) == NodeKind::Call {
            out.push(CanonicalToken::Call);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::CanonicalToken::*;
    use super::*;
    use crate::lang::parse_source;

    fn canon(src: &str) -> Vec<CanonicalToken> {
        canonical_tokens(&parse_source(src).unwrap())
    }

    #[test]
    fn minimal_program() {
        assert_eq!(canon("int main(void){return 0;}"), vec![BeginFunc, Return, EndFunc]);
    }

    #[test]
    fn while_loop() {
        assert_eq!(
            canon("int f(int a, int b){while(a<b){a++;} return a;}"),
            vec![BeginFunc, BeginWhile, Expr, EndWhile, Return, EndFunc]
        );
    }

    #[test]
    fn mixed_statements() {
        let src = "#include <stdio.h>\nint g(int);\nint main(){int x = g(1); x = 2; if (x) printf(\"%d\", g(x)); else {} for (int i = 0; i < 3; i++) {} return 0;}";
        assert_eq!(
            canon(src),
            vec![
                BeginFunc, Decl, Call, Assign, BeginIf, Call, Call, Else, EndIf, BeginFor, Decl, Expr,
                EndFor, Return, EndFunc
            ]
        );
    }

    #[test]
    fn renaming_and_comments_do_not_matter() {
        let a = canon("int main(){int a = 1; // c\n while (a) { a = a - 1; } return a;}");
        let b = canon("int main(){/* x */ int zz = 1; while (zz) { zz = zz - 1; } return zz;}");
        assert_eq!(a, b);
    }

    #[test]
    fn symbols_round_trip_through_serde() {
        let s = serde_json::to_string(&BeginWhile).unwrap();
        assert_eq!(s, "\"BEGIN_WHILE\"");
        assert_eq!(BeginWhile.to_string(), "BEGIN_WHILE");
    }
}
