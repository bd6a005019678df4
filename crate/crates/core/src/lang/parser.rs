//! Recursive-descent parser for the C subset.
//!
//! Grammar covered: `#include`, `#define`, global declarations, function
//! prototypes and definitions; statements `decl`, `expr;`, `if`/`else`,
//! `while`, `for`, `return`, `break`, `continue`, blocks and `;`;
//! expressions with the usual C precedence (no ternary, casts, `sizeof` or
//! comma operator). Anything outside that set is reported as
//! [`ParseError::UnsupportedConstruct`] so callers can skip the file.
//!
//! Bodies of `if`, `while` and `for` are always blocks: a braceless body is
//! wrapped into one. Declarations with several declarators are split into
//! one `Decl` per declarator.

use std::collections::HashMap;

use thiserror::Error;

use super::ast::{Ast, AstNode, Comment, CommentSide, NodeId, NodeKind};
use super::lexer::{self, LexError, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{column}: expected {expected}, found {found}")]
    SyntaxError { line: usize, column: usize, expected: String, found: String },
    #[error("unsupported construct at {line}:{column}: {construct}")]
    UnsupportedConstruct { line: usize, column: usize, construct: String },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::SyntaxError { line, column, .. } | ParseError::UnsupportedConstruct { line, column, .. } => {
                (*line, *column)
            }
        }
    }
}

/// Failure to turn source text into a tree.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Tokenizes and parses in one go.
pub fn parse_source(source: &str) -> Result<Ast, SourceError> {
    let tokens = lexer::tokenize(source)?;
    Ok(parse(&tokens)?)
}

const TYPE_KEYWORDS: &[&str] = &[
    "int", "char", "void", "long", "short", "unsigned", "signed", "float", "double", "bool", "const",
    "static", "extern", "inline", "volatile", "register",
];

const TYPE_NAMES: &[&str] = &["size_t", "int64_t", "uint64_t", "int32_t", "uint32_t", "int8_t", "uint8_t"];

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "do", "switch", "case", "default", "goto", "struct", "union", "enum", "typedef", "class",
    "template", "namespace", "using", "sizeof", "auto",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="];

/// Binding power of binary operators; higher binds tighter.
pub(crate) fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 3,
        "&&" => 4,
        "|" => 5,
        "^" => 6,
        "&" => 7,
        "==" | "!=" => 8,
        "<" | ">" | "<=" | ">=" => 9,
        "<<" | ">>" => 10,
        "+" | "-" => 11,
        "*" | "/" | "%" => 12,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy)]
struct Span {
    start: usize,
    end: usize,
    end_line: usize,
}

struct Container {
    node: NodeId,
    span: Span,
    items: Vec<NodeId>,
}

struct Parser<'a> {
    toks: Vec<&'a Token>,
    pos: usize,
    ast: Ast,
    spans: HashMap<NodeId, Span>,
    containers: Vec<Container>,
}

type PResult<T> = Result<T, ParseError>;

/// Builds a tree from a token stream produced by [`lexer::tokenize`].
pub fn parse(tokens: &[Token]) -> Result<Ast, ParseError> {
    let (comments, code): (Vec<&Token>, Vec<&Token>) = tokens.iter().partition(|t| t.kind == TokenKind::Comment);
    let mut p = Parser { toks: code, pos: 0, ast: Ast::new(), spans: HashMap::new(), containers: Vec::new() };
    p.translation_unit()?;
    p.attach_comments(&comments);
    Ok(p.ast)
}

impl<'a> Parser<'a> {
    // ---- token helpers ----

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + n).copied()
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_keyword(&self, k: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(k))
    }

    fn next(&mut self) -> PResult<&'a Token> {
        let t = self.peek().ok_or_else(|| self.error("more input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn prev_token(&self) -> &'a Token {
        self.toks[self.pos - 1]
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<&'a Token> {
        if self.at_punct(p) {
            self.next()
        } else {
            Err(self.error(&format!("`{p}`")))
        }
    }

    fn position(&self) -> (usize, usize) {
        match self.peek() {
            Some(t) => (t.line, t.column),
            None => self.toks.last().map(|t| (t.line, t.column + t.text.chars().count())).unwrap_or((1, 1)),
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        let (line, column) = self.position();
        ParseError::SyntaxError {
            line,
            column,
            expected: expected.to_string(),
            found: self.peek().map(|t| format!("`{}`", t.text)).unwrap_or_else(|| "end of input".into()),
        }
    }

    fn unsupported(&self, construct: &str) -> ParseError {
        let (line, column) = self.position();
        ParseError::UnsupportedConstruct { line, column, construct: construct.to_string() }
    }

    fn span_from(&self, start_tok: usize) -> Span {
        let first = self.toks[start_tok];
        let last = self.prev_token();
        Span { start: first.offset, end: last.end_offset(), end_line: last.line }
    }

    fn at_type_start(&self) -> bool {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword => TYPE_KEYWORDS.contains(&t.text.as_str()),
            Some(t) if t.kind == TokenKind::Identifier => {
                // `size_t n` but not `size_t(...)` or `x = ...`.
                TYPE_NAMES.contains(&t.text.as_str())
                    && self.peek_at(1).is_some_and(|n| n.kind == TokenKind::Identifier || n.is_punct("*"))
            }
            _ => false,
        }
    }

    fn check_unsupported_keyword(&self) -> PResult<()> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword && UNSUPPORTED_KEYWORDS.contains(&t.text.as_str()) {
                return Err(self.unsupported(&format!("`{}`", t.text)));
            }
        }
        Ok(())
    }

    // ---- declarations ----

    fn base_type(&mut self) -> PResult<String> {
        let mut words: Vec<&str> = Vec::new();
        let mut named = false;
        loop {
            match self.peek() {
                Some(t) if t.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&t.text.as_str()) => {
                    words.push(&t.text);
                    self.pos += 1;
                }
                Some(t)
                    if t.kind == TokenKind::Identifier
                        && !named
                        && TYPE_NAMES.contains(&t.text.as_str())
                        && self.peek_at(1).is_some_and(|n| n.kind == TokenKind::Identifier || n.is_punct("*")) =>
                {
                    named = true;
                    words.push(&t.text);
                    self.pos += 1;
                }
                Some(t) if t.kind == TokenKind::Keyword && UNSUPPORTED_KEYWORDS.contains(&t.text.as_str()) => {
                    return Err(self.unsupported(&format!("`{}` in a type", t.text)));
                }
                _ => break,
            }
        }
        if words.is_empty() {
            return Err(self.error("a type"));
        }
        Ok(words.join(" "))
    }

    fn pointer_suffix(&mut self) -> String {
        let mut s = String::new();
        while self.eat_punct("*") {
            s.push('*');
        }
        s
    }

    fn identifier(&mut self) -> PResult<NodeId> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                self.pos += 1;
                Ok(self.ast.leaf(NodeKind::Identifier, t.text.clone()))
            }
            _ => Err(self.error("an identifier")),
        }
    }

    /// `[expr]` suffixes; returns the bound expressions (`Empty` for `[]`).
    fn array_dims(&mut self) -> PResult<Vec<NodeId>> {
        let mut dims = Vec::new();
        while self.eat_punct("[") {
            if self.eat_punct("]") {
                dims.push(self.ast.leaf(NodeKind::Empty, ""));
            } else {
                dims.push(self.expression()?);
                self.expect_punct("]")?;
            }
        }
        Ok(dims)
    }

    /// Declarator list after the base type, up to and including `;` unless
    /// `single` (for-loop init, where the caller consumes the `;`).
    fn declarators(&mut self, base: &str, single: bool) -> PResult<Vec<NodeId>> {
        let mut decls = Vec::new();
        loop {
            let ty = format!("{base}{}", self.pointer_suffix());
            let name = self.identifier()?;
            let dims = self.array_dims()?;
            let mut node = AstNode::new(NodeKind::Decl);
            node.ty = ty;
            node.dims = dims.len();
            node.children.push(name);
            node.children.extend(dims);
            if self.eat_punct("=") {
                if self.at_punct("{") {
                    return Err(self.unsupported("brace initializer"));
                }
                node.children.push(self.assignment()?);
            }
            decls.push(self.ast.add(node));
            if self.at_punct(",") {
                if single {
                    return Err(self.unsupported("multiple declarators in a for-loop header"));
                }
                self.pos += 1;
                continue;
            }
            break;
        }
        if !single {
            self.expect_punct(";")?;
        }
        Ok(decls)
    }

    fn params(&mut self) -> PResult<Vec<NodeId>> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if self.eat_punct(")") {
            return Ok(params);
        }
        if self.at_keyword("void") && self.peek_at(1).is_some_and(|t| t.is_punct(")")) {
            self.pos += 2;
            return Ok(params);
        }
        loop {
            if self.at_punct("...") {
                return Err(self.unsupported("variadic parameters"));
            }
            let base = self.base_type()?;
            let ty = format!("{base}{}", self.pointer_suffix());
            let mut node = AstNode::new(NodeKind::Param);
            node.ty = ty;
            if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) {
                let name = self.identifier()?;
                node.children.push(name);
            }
            let dims = self.array_dims()?;
            node.dims = dims.len();
            node.children.extend(dims);
            params.push(self.ast.add(node));
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(")")?;
            return Ok(params);
        }
    }

    // ---- top level ----

    fn translation_unit(&mut self) -> PResult<()> {
        let mut items = Vec::new();
        while let Some(t) = self.peek() {
            let start = self.pos;
            let produced = if t.kind == TokenKind::PreprocessorDirective {
                self.pos += 1;
                vec![self.directive(t)?]
            } else {
                self.check_unsupported_keyword()?;
                if !self.at_type_start() {
                    return Err(self.error("a declaration or function definition"));
                }
                self.external_declaration()?
            };
            let span = self.span_from(start);
            for id in &produced {
                self.spans.insert(*id, span);
            }
            items.extend(produced);
        }
        let root = self.ast.root;
        self.ast.node_mut(root).children = items.clone();
        self.containers.push(Container { node: root, span: Span { start: 0, end: usize::MAX, end_line: 0 }, items });
        Ok(())
    }

    fn directive(&mut self, t: &Token) -> PResult<NodeId> {
        let body = t.text.replace("\\\n", " ");
        let body = body.trim_start_matches('#').trim_start();
        if let Some(rest) = body.strip_prefix("include") {
            let rest = rest.trim();
            if !(rest.starts_with('<') && rest.ends_with('>') || rest.starts_with('"') && rest.ends_with('"')) {
                return Err(ParseError::SyntaxError {
                    line: t.line,
                    column: t.column,
                    expected: "`<header>` or `\"header\"`".into(),
                    found: format!("`{rest}`"),
                });
            }
            return Ok(self.ast.leaf(NodeKind::Include, rest));
        }
        if let Some(rest) = body.strip_prefix("define") {
            if rest.starts_with(|c: char| c.is_whitespace()) {
                let rest = rest.trim();
                if !rest.starts_with(|c: char| c == '_' || c.is_ascii_alphabetic()) {
                    return Err(ParseError::SyntaxError {
                        line: t.line,
                        column: t.column,
                        expected: "a macro name".into(),
                        found: format!("`{rest}`"),
                    });
                }
                return Ok(self.ast.leaf(NodeKind::MacroDefine, rest));
            }
        }
        Err(ParseError::UnsupportedConstruct {
            line: t.line,
            column: t.column,
            construct: format!("preprocessor directive `{}`", t.text.lines().next().unwrap_or_default()),
        })
    }

    fn external_declaration(&mut self) -> PResult<Vec<NodeId>> {
        let save = self.pos;
        let base = self.base_type()?;
        let ptr = self.pointer_suffix();
        let is_function = self.peek().is_some_and(|t| t.kind == TokenKind::Identifier)
            && self.peek_at(1).is_some_and(|t| t.is_punct("("));
        if !is_function {
            self.pos = save;
            let base = self.base_type()?;
            return self.declarators(&base, false);
        }
        let name = self.identifier()?;
        let params = self.params()?;
        let mut node = AstNode::new(NodeKind::FunctionDef);
        node.ty = format!("{base}{ptr}");
        node.children.push(name);
        node.children.extend(params);
        if self.eat_punct(";") {
            return Ok(vec![self.ast.add(node)]);
        }
        if !self.at_punct("{") {
            return Err(self.error("`{` or `;`"));
        }
        let body = self.block()?;
        node.children.push(body);
        Ok(vec![self.ast.add(node)])
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<NodeId> {
        let start = self.pos;
        self.expect_punct("{")?;
        let mut items = Vec::new();
        while !self.at_punct("}") {
            if self.peek().is_none() {
                return Err(self.error("`}`"));
            }
            items.extend(self.statement()?);
        }
        self.pos += 1;
        let span = self.span_from(start);
        let id = self.ast.add(AstNode::new(NodeKind::Block).with_children(items.clone()));
        self.spans.insert(id, span);
        self.containers.push(Container { node: id, span, items });
        Ok(id)
    }

    /// Statement used as the body of a control construct; always a block.
    fn body(&mut self) -> PResult<NodeId> {
        if self.at_punct("{") {
            return self.block();
        }
        let start = self.pos;
        let items = self.statement()?;
        let span = self.span_from(start);
        let id = self.ast.add(AstNode::new(NodeKind::Block).with_children(items.clone()));
        self.spans.insert(id, span);
        self.containers.push(Container { node: id, span, items });
        Ok(id)
    }

    fn statement(&mut self) -> PResult<Vec<NodeId>> {
        let start = self.pos;
        let ids = self.statement_inner()?;
        let span = self.span_from(start);
        for id in &ids {
            self.spans.insert(*id, span);
        }
        Ok(ids)
    }

    fn statement_inner(&mut self) -> PResult<Vec<NodeId>> {
        let t = self.peek().ok_or_else(|| self.error("a statement"))?;
        if t.kind == TokenKind::PreprocessorDirective {
            return Err(self.unsupported("preprocessor directive inside a function"));
        }
        self.check_unsupported_keyword()?;
        if t.is_punct("{") {
            return Ok(vec![self.block()?]);
        }
        if t.is_punct(";") {
            self.pos += 1;
            return Ok(vec![self.ast.leaf(NodeKind::Empty, "")]);
        }
        if self.at_type_start() {
            let base = self.base_type()?;
            return self.declarators(&base, false);
        }
        if t.kind == TokenKind::Keyword {
            match t.text.as_str() {
                "if" => return Ok(vec![self.if_statement()?]),
                "while" => {
                    self.pos += 1;
                    self.expect_punct("(")?;
                    let cond = self.expression()?;
                    self.expect_punct(")")?;
                    let body = self.body()?;
                    return Ok(vec![self.ast.add(AstNode::new(NodeKind::While).with_children(vec![cond, body]))]);
                }
                "for" => return Ok(vec![self.for_statement()?]),
                "return" => {
                    self.pos += 1;
                    let mut node = AstNode::new(NodeKind::Return);
                    if !self.at_punct(";") {
                        node.children.push(self.expression()?);
                    }
                    self.expect_punct(";")?;
                    return Ok(vec![self.ast.add(node)]);
                }
                "break" | "continue" => {
                    self.pos += 1;
                    self.expect_punct(";")?;
                    let kind = if t.text == "break" { NodeKind::Break } else { NodeKind::Continue };
                    return Ok(vec![self.ast.leaf(kind, t.text.clone())]);
                }
                "else" => return Err(self.error("a statement")),
                _ => {}
            }
        }
        let e = self.expression()?;
        self.expect_punct(";")?;
        Ok(vec![self.ast.add(AstNode::new(NodeKind::ExprStmt).with_children(vec![e]))])
    }

    fn if_statement(&mut self) -> PResult<NodeId> {
        self.pos += 1;
        self.expect_punct("(")?;
        let cond = self.expression()?;
        self.expect_punct(")")?;
        let then = self.body()?;
        let mut children = vec![cond, then];
        if self.at_keyword("else") {
            self.pos += 1;
            children.push(self.body()?);
        }
        Ok(self.ast.add(AstNode::new(NodeKind::If).with_children(children)))
    }

    fn for_statement(&mut self) -> PResult<NodeId> {
        self.pos += 1;
        self.expect_punct("(")?;
        let init = if self.at_punct(";") {
            self.ast.leaf(NodeKind::Empty, "")
        } else if self.at_type_start() {
            let base = self.base_type()?;
            self.declarators(&base, true)?[0]
        } else {
            self.expression()?
        };
        self.expect_punct(";")?;
        let cond = if self.at_punct(";") { self.ast.leaf(NodeKind::Empty, "") } else { self.expression()? };
        self.expect_punct(";")?;
        let step = if self.at_punct(")") { self.ast.leaf(NodeKind::Empty, "") } else { self.expression()? };
        self.expect_punct(")")?;
        let body = self.body()?;
        Ok(self.ast.add(AstNode::new(NodeKind::For).with_children(vec![init, cond, step, body])))
    }

    // ---- expressions ----

    fn expression(&mut self) -> PResult<NodeId> {
        let e = self.assignment()?;
        if self.at_punct(",") {
            return Err(self.unsupported("comma operator"));
        }
        Ok(e)
    }

    fn assignment(&mut self) -> PResult<NodeId> {
        let lhs = self.binary(3)?;
        if self.at_punct("?") {
            return Err(self.unsupported("conditional operator"));
        }
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Punct && ASSIGN_OPS.contains(&t.text.as_str()) {
                self.pos += 1;
                let rhs = self.assignment()?;
                return Ok(self.ast.add(AstNode::with_text(NodeKind::Assign, t.text.clone()).with_children(vec![lhs, rhs])));
            }
        }
        Ok(lhs)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<NodeId> {
        let mut lhs = self.unary()?;
        loop {
            let Some(t) = self.peek() else { break };
            if t.kind != TokenKind::Punct {
                break;
            }
            let Some(prec) = binary_precedence(&t.text) else { break };
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let rhs = self.binary(prec + 1)?;
            lhs = self.ast.add(AstNode::with_text(NodeKind::BinaryOp, t.text.clone()).with_children(vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<NodeId> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Punct && matches!(t.text.as_str(), "!" | "~" | "-" | "+" | "++" | "--" | "*" | "&") {
                self.pos += 1;
                let operand = self.unary()?;
                return Ok(self.ast.add(AstNode::with_text(NodeKind::UnaryOp, t.text.clone()).with_children(vec![operand])));
            }
            if t.is_keyword("sizeof") {
                return Err(self.unsupported("`sizeof`"));
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<NodeId> {
        let mut e = self.primary()?;
        loop {
            if self.at_punct("(") {
                if self.ast.kind(e) != NodeKind::Identifier {
                    return Err(self.unsupported("call through an expression"));
                }
                self.pos += 1;
                let mut children = vec![e];
                if !self.eat_punct(")") {
                    loop {
                        children.push(self.assignment()?);
                        if self.eat_punct(",") {
                            continue;
                        }
                        self.expect_punct(")")?;
                        break;
                    }
                }
                e = self.ast.add(AstNode::new(NodeKind::Call).with_children(children));
            } else if self.eat_punct("[") {
                let idx = self.expression()?;
                self.expect_punct("]")?;
                e = self.ast.add(AstNode::with_text(NodeKind::BinaryOp, "[]").with_children(vec![e, idx]));
            } else if self.at_punct("++") || self.at_punct("--") {
                let op = format!("post{}", self.next()?.text);
                e = self.ast.add(AstNode::with_text(NodeKind::UnaryOp, op).with_children(vec![e]));
            } else if self.at_punct(".") || self.at_punct("->") {
                let op = self.next()?.text.clone();
                let field = self.identifier()?;
                e = self.ast.add(AstNode::with_text(NodeKind::BinaryOp, op).with_children(vec![e, field]));
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<NodeId> {
        let t = self.peek().ok_or_else(|| self.error("an expression"))?;
        match t.kind {
            TokenKind::Identifier => {
                self.pos += 1;
                let mut name = t.text.clone();
                while self.at_punct("::") {
                    self.pos += 1;
                    match self.peek() {
                        Some(n) if n.kind == TokenKind::Identifier => {
                            self.pos += 1;
                            name.push_str("::");
                            name.push_str(&n.text);
                        }
                        _ => return Err(self.error("an identifier after `::`")),
                    }
                }
                Ok(self.ast.leaf(NodeKind::Identifier, name))
            }
            TokenKind::IntLiteral | TokenKind::CharLiteral => {
                self.pos += 1;
                Ok(self.ast.leaf(NodeKind::Literal, t.text.clone()))
            }
            TokenKind::StringLiteral => {
                self.pos += 1;
                if self.peek().is_some_and(|n| n.kind == TokenKind::StringLiteral) {
                    return Err(self.unsupported("adjacent string literal concatenation"));
                }
                Ok(self.ast.leaf(NodeKind::Literal, t.text.clone()))
            }
            TokenKind::Punct if t.text == "(" => {
                if self.peek_at(1).is_some_and(|n| {
                    n.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&n.text.as_str())
                }) {
                    return Err(self.unsupported("cast expression"));
                }
                self.pos += 1;
                let e = self.expression()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            TokenKind::Keyword if UNSUPPORTED_KEYWORDS.contains(&t.text.as_str()) => {
                Err(self.unsupported(&format!("`{}`", t.text)))
            }
            _ => Err(self.error("an expression")),
        }
    }

    // ---- comments ----

    fn attach_comments(&mut self, comments: &[&Token]) {
        for c in comments {
            let (anchor, side) = self.anchor_for(c);
            self.ast.comments.push(Comment { anchor, side, text: c.text.clone() });
        }
    }

    fn anchor_for(&self, c: &Token) -> (NodeId, CommentSide) {
        let off = c.offset;
        let container = self
            .containers
            .iter()
            .filter(|k| k.span.start <= off && off < k.span.end)
            .min_by_key(|k| k.span.end - k.span.start)
            .expect("translation unit covers everything");
        let span = |id: &NodeId| self.spans.get(id).copied();
        if let Some(inside) = container.items.iter().find(|id| span(id).is_some_and(|s| s.start <= off && off < s.end)) {
            return (*inside, CommentSide::Before);
        }
        let prev = container.items.iter().rev().find(|id| span(id).is_some_and(|s| s.end <= off));
        let next = container.items.iter().find(|id| span(id).is_some_and(|s| s.start > off));
        match (prev, next) {
            (Some(p), _) if span(p).is_some_and(|s| s.end_line == c.line) => (*p, CommentSide::After),
            (_, Some(n)) => (*n, CommentSide::Before),
            (Some(p), None) => (*p, CommentSide::After),
            (None, None) => (container.node, CommentSide::After),
        }
    }
}
