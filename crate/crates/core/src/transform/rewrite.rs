//! One rewrite per transformation kind. Each edits the tree in place and
//! reports whether it found a site.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use super::config::TransformConfig;
use super::macros;
use crate::lang::{lexer, Ast, AstNode, Comment, CommentSide, NodeId, NodeKind};

pub(crate) enum Outcome {
    Applied,
    NotApplicable(String),
}

fn no_site() -> Outcome {
    Outcome::NotApplicable("no applicable site".to_string())
}

// Names that must keep their meaning even if they happen to be unused.
const RESERVED: &[&str] = &[
    "main", "printf", "scanf", "puts", "putchar", "getchar", "gets", "malloc", "free", "memset", "strlen", "std",
    "cout", "cin", "endl", "setw", "NULL", "EOF", "abs", "min", "max",
];

pub(crate) fn comments_edit<R: Rng + ?Sized>(ast: &mut Ast, rng: &mut R, config: &TransformConfig) -> Outcome {
    let had_comments = !ast.comments.is_empty();
    ast.comments.clear();
    let sites: Vec<NodeId> = ast
        .preorder()
        .into_iter()
        .filter(|&id| ast.kind(id) == NodeKind::Block)
        .flat_map(|b| ast.children(b).to_vec())
        .collect();
    if sites.is_empty() {
        return if had_comments { Outcome::Applied } else { no_site() };
    }
    let mut chosen: Vec<NodeId> = sites.iter().copied().filter(|_| rng.gen_bool(0.25)).collect();
    if chosen.is_empty() {
        chosen.push(sites[rng.gen_range(0..sites.len())]);
    }
    for anchor in chosen {
        let text = comment_text(config.comment_pool.choose(rng).map(String::as_str).unwrap_or("// ..."));
        ast.comments.push(Comment { anchor, side: CommentSide::Before, text });
    }
    Outcome::Applied
}

/// Turns a pool entry into a well-formed comment.
fn comment_text(raw: &str) -> String {
    let flat = raw.replace(['\n', '\r'], " ");
    let flat = flat.trim();
    if flat.starts_with("//") {
        flat.to_string()
    } else if flat.starts_with("/*") && flat.ends_with("*/") && flat.len() >= 4 && !flat[2..flat.len() - 2].contains("*/") {
        flat.to_string()
    } else {
        format!("// {flat}")
    }
}

/// Every identifier spelling in the program, including macro bodies.
fn identifier_universe(ast: &Ast) -> HashSet<String> {
    let mut names: HashSet<String> = RESERVED.iter().map(|s| s.to_string()).collect();
    for id in ast.preorder() {
        let n = ast.node(id);
        match n.kind {
            NodeKind::Identifier => {
                names.insert(n.text.clone());
            }
            NodeKind::MacroDefine => {
                if let Ok(toks) = lexer::tokenize(&n.text) {
                    names.extend(toks.into_iter().filter(|t| t.kind == lexer::TokenKind::Identifier).map(|t| t.text));
                }
            }
            _ => {}
        }
    }
    names
}

fn macro_names(ast: &Ast) -> HashSet<String> {
    ast.find_all(NodeKind::MacroDefine)
        .into_iter()
        .filter_map(|m| macros::MacroDef::parse(&ast.node(m).text).map(|d| d.name))
        .collect()
}

fn defined_functions(ast: &Ast) -> Vec<NodeId> {
    ast.children(ast.root)
        .iter()
        .copied()
        .filter(|&f| ast.kind(f) == NodeKind::FunctionDef && ast.function_body(f).is_some())
        .collect()
}

struct FreshNames {
    stems: Vec<String>,
    taken: HashSet<String>,
    next: usize,
}

impl FreshNames {
    fn new<R: Rng + ?Sized>(pool: &[String], taken: HashSet<String>, rng: &mut R) -> Self {
        let mut stems = pool.to_vec();
        if stems.is_empty() {
            stems.push("v".to_string());
        }
        stems.shuffle(rng);
        FreshNames { stems, taken, next: 0 }
    }

    fn take(&mut self) -> String {
        loop {
            let stem = &self.stems[self.next % self.stems.len()];
            let round = self.next / self.stems.len();
            self.next += 1;
            let candidate = if round == 0 { stem.clone() } else { format!("{stem}{round}") };
            if !lexer::is_keyword(&candidate) && self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

/// Applies `map` to every identifier occurrence, in the tree and in macro bodies.
fn rename_everywhere(ast: &mut Ast, map: &HashMap<String, String>) {
    for id in ast.preorder() {
        match ast.kind(id) {
            NodeKind::Identifier => {
                if let Some(new) = map.get(&ast.node(id).text) {
                    ast.node_mut(id).text = new.clone();
                }
            }
            NodeKind::MacroDefine => {
                let text = ast.node(id).text.clone();
                if let Ok(toks) = lexer::tokenize(&text) {
                    let mut out = String::new();
                    let mut pos = 0;
                    for t in &toks {
                        out.push_str(&text[pos..t.offset]);
                        match map.get(&t.text) {
                            Some(new) if t.kind == lexer::TokenKind::Identifier => out.push_str(new),
                            _ => out.push_str(&t.text),
                        }
                        pos = t.end_offset();
                    }
                    out.push_str(&text[pos..]);
                    ast.node_mut(id).text = out;
                }
            }
            _ => {}
        }
    }
}

fn rename<R: Rng + ?Sized>(ast: &mut Ast, originals: BTreeSet<String>, rng: &mut R, config: &TransformConfig) -> Outcome {
    if originals.is_empty() {
        return no_site();
    }
    let mut fresh = FreshNames::new(&config.name_pool, identifier_universe(ast), rng);
    let map: HashMap<String, String> = originals.into_iter().map(|o| (o, fresh.take())).collect();
    rename_everywhere(ast, &map);
    Outcome::Applied
}

pub(crate) fn rename_variables<R: Rng + ?Sized>(ast: &mut Ast, rng: &mut R, config: &TransformConfig) -> Outcome {
    let mut excluded: HashSet<String> = macro_names(ast);
    excluded.extend(RESERVED.iter().map(|s| s.to_string()));
    for id in ast.preorder() {
        match ast.kind(id) {
            NodeKind::FunctionDef => excluded.extend(ast.declared_name(id).map(str::to_string)),
            NodeKind::Call => {
                excluded.insert(ast.node(ast.children(id)[0]).text.clone());
            }
            _ => {}
        }
    }
    let originals: BTreeSet<String> = ast
        .preorder()
        .into_iter()
        .filter(|&id| matches!(ast.kind(id), NodeKind::Decl | NodeKind::Param))
        .filter_map(|id| ast.declared_name(id))
        .filter(|n| !excluded.contains(*n))
        .map(str::to_string)
        .collect();
    rename(ast, originals, rng, config)
}

pub(crate) fn rename_functions<R: Rng + ?Sized>(ast: &mut Ast, rng: &mut R, config: &TransformConfig) -> Outcome {
    let macros = macro_names(ast);
    let originals: BTreeSet<String> = defined_functions(ast)
        .into_iter()
        .filter_map(|f| ast.declared_name(f))
        .filter(|n| !RESERVED.contains(n) && !macros.contains(*n))
        .map(str::to_string)
        .collect();
    rename(ast, originals, rng, config)
}

pub(crate) fn swap_if_else(ast: &mut Ast) -> Outcome {
    let sites: Vec<NodeId> = ast
        .find_all(NodeKind::If)
        .into_iter()
        .filter(|&i| ast.children(i).len() == 3)
        .collect();
    if sites.is_empty() {
        return no_site();
    }
    for id in sites {
        let ch = ast.children(id).to_vec();
        let neg = ast.add(AstNode::with_text(NodeKind::UnaryOp, "!").with_children(vec![ch[0]]));
        ast.node_mut(id).children = vec![neg, ch[2], ch[1]];
    }
    Outcome::Applied
}

pub(crate) fn rearrange_function_decls<R: Rng + ?Sized>(ast: &mut Ast, rng: &mut R) -> Outcome {
    let root = ast.root;
    let mut defs = defined_functions(ast);
    let defined: HashSet<String> = defs.iter().filter_map(|&f| ast.declared_name(f)).map(str::to_string).collect();
    if !defined.iter().any(|n| n != "main") {
        return no_site();
    }
    let items = ast.children(root).to_vec();
    // Non-function items and prototypes of functions defined elsewhere keep
    // their relative order; our own prototypes are regenerated.
    let mut out: Vec<NodeId> = items
        .iter()
        .copied()
        .filter(|&i| {
            ast.kind(i) != NodeKind::FunctionDef
                || (ast.function_body(i).is_none() && !ast.declared_name(i).is_some_and(|n| defined.contains(n)))
        })
        .collect();
    for &f in &defs {
        if ast.declared_name(f) == Some("main") {
            continue;
        }
        let name = ast.deep_copy(ast.children(f)[0]);
        let mut children = vec![name];
        for p in ast.function_params(f) {
            children.push(ast.deep_copy(p));
        }
        let ty = ast.node(f).ty.clone();
        let proto = ast.add(AstNode { ty, ..AstNode::new(NodeKind::FunctionDef) }.with_children(children));
        out.push(proto);
    }
    defs.shuffle(rng);
    out.extend(defs);
    ast.node_mut(root).children = out;
    Outcome::Applied
}

/// True when `body` holds a `continue` that belongs to the loop owning it.
fn has_direct_continue(ast: &Ast, body: NodeId) -> bool {
    let mut stack = vec![body];
    while let Some(id) = stack.pop() {
        match ast.kind(id) {
            NodeKind::Continue => return true,
            NodeKind::While | NodeKind::For => {}
            _ => stack.extend(ast.children(id).iter().copied()),
        }
    }
    false
}

pub(crate) fn for_to_while(ast: &mut Ast) -> Outcome {
    let loops = ast.find_all(NodeKind::For);
    if loops.is_empty() {
        return no_site();
    }
    let mut converted = 0;
    for id in &loops {
        let ch = ast.children(*id).to_vec();
        let (init, cond, step, body) = (ch[0], ch[1], ch[2], ch[3]);
        if has_direct_continue(ast, body) {
            continue;
        }
        if ast.kind(step) != NodeKind::Empty {
            let s = ast.add(AstNode::new(NodeKind::ExprStmt).with_children(vec![step]));
            ast.node_mut(body).children.push(s);
        }
        let cond = if ast.kind(cond) == NodeKind::Empty { ast.leaf(NodeKind::Literal, "1") } else { cond };
        let init_stmt = match ast.kind(init) {
            NodeKind::Empty => None,
            NodeKind::Decl => Some(init),
            _ => Some(ast.add(AstNode::new(NodeKind::ExprStmt).with_children(vec![init]))),
        };
        // The loop node is reused so comments anchored on it stay put.
        match init_stmt {
            None => {
                let n = ast.node_mut(*id);
                n.kind = NodeKind::While;
                n.children = vec![cond, body];
            }
            Some(init_stmt) => {
                let w = ast.add(AstNode::new(NodeKind::While).with_children(vec![cond, body]));
                let n = ast.node_mut(*id);
                n.kind = NodeKind::Block;
                n.children = vec![init_stmt, w];
            }
        }
        converted += 1;
    }
    if converted == 0 {
        Outcome::NotApplicable("every for loop contains a continue".to_string())
    } else {
        Outcome::Applied
    }
}

pub(crate) fn while_to_for(ast: &mut Ast) -> Outcome {
    let loops = ast.find_all(NodeKind::While);
    if loops.is_empty() {
        return no_site();
    }
    for id in loops {
        let ch = ast.children(id).to_vec();
        let init = ast.leaf(NodeKind::Empty, "");
        let step = ast.leaf(NodeKind::Empty, "");
        let n = ast.node_mut(id);
        n.kind = NodeKind::For;
        n.children = vec![init, ch[0], step, ch[1]];
    }
    Outcome::Applied
}

enum FormatPiece {
    Text(String),
    Arg { width: Option<String> },
}

/// Splits a printf format literal (with quotes) into text and conversions.
/// Returns `None` for anything beyond `%d %i %u %s %c`, optional width and
/// `l`/`ll` length modifiers, and `%%`.
fn parse_format(literal: &str) -> Option<Vec<FormatPiece>> {
    let inner = literal.strip_prefix('"')?.strip_suffix('"')?;
    let mut pieces = Vec::new();
    let mut text = String::new();
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                text.push(c);
                text.push(chars.next()?);
            }
            '%' => {
                if chars.peek() == Some(&'%') {
                    chars.next();
                    text.push('%');
                    continue;
                }
                let mut width = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    width.push(*d);
                    chars.next();
                }
                let mut longs = 0;
                while chars.peek() == Some(&'l') {
                    longs += 1;
                    chars.next();
                }
                let conv = chars.next()?;
                let ok = match conv {
                    'd' | 'i' | 'u' => longs <= 2,
                    's' | 'c' => longs == 0,
                    _ => false,
                };
                if !ok {
                    return None;
                }
                if !text.is_empty() {
                    pieces.push(FormatPiece::Text(std::mem::take(&mut text)));
                }
                pieces.push(FormatPiece::Arg { width: (!width.is_empty()).then_some(width) });
            }
            _ => text.push(c),
        }
    }
    if !text.is_empty() {
        pieces.push(FormatPiece::Text(text));
    }
    Some(pieces)
}

fn has_include(ast: &Ast, header: &str) -> bool {
    ast.children(ast.root).iter().any(|&i| ast.kind(i) == NodeKind::Include && ast.node(i).text == header)
}

pub(crate) fn printf_to_cout(ast: &mut Ast) -> Outcome {
    let mut converted = 0;
    let mut needs_iomanip = false;
    for stmt in ast.find_all(NodeKind::ExprStmt) {
        let call = ast.children(stmt)[0];
        if ast.kind(call) != NodeKind::Call {
            continue;
        }
        let ch = ast.children(call).to_vec();
        if ast.node(ch[0]).text != "printf" || ch.len() < 2 || ast.kind(ch[1]) != NodeKind::Literal {
            continue;
        }
        let Some(pieces) = parse_format(&ast.node(ch[1]).text) else { continue };
        let args = &ch[2..];
        let conversions = pieces.iter().filter(|p| matches!(p, FormatPiece::Arg { .. })).count();
        if conversions != args.len() || pieces.is_empty() {
            continue;
        }
        let mut chain = ast.leaf(NodeKind::Identifier, "std::cout");
        let push = |ast: &mut Ast, chain: &mut NodeId, rhs: NodeId| {
            *chain = ast.add(AstNode::with_text(NodeKind::BinaryOp, "<<").with_children(vec![*chain, rhs]));
        };
        let mut next_arg = args.iter();
        for p in pieces {
            match p {
                FormatPiece::Text(t) => {
                    let lit = ast.leaf(NodeKind::Literal, format!("\"{t}\""));
                    push(ast, &mut chain, lit);
                }
                FormatPiece::Arg { width } => {
                    if let Some(w) = width {
                        needs_iomanip = true;
                        let f = ast.leaf(NodeKind::Identifier, "std::setw");
                        let n = ast.leaf(NodeKind::Literal, w);
                        let setw = ast.add(AstNode::new(NodeKind::Call).with_children(vec![f, n]));
                        push(ast, &mut chain, setw);
                    }
                    let a = *next_arg.next().expect("argument count checked");
                    push(ast, &mut chain, a);
                }
            }
        }
        ast.node_mut(stmt).children = vec![chain];
        converted += 1;
    }
    if converted == 0 {
        return no_site();
    }
    let root = ast.root;
    for (header, wanted) in [("<iostream>", true), ("<iomanip>", needs_iomanip)] {
        if wanted && !has_include(ast, header) {
            let inc = ast.leaf(NodeKind::Include, header);
            ast.node_mut(root).children.insert(0, inc);
        }
    }
    Outcome::Applied
}

pub(crate) fn expand_macros(ast: &mut Ast) -> Outcome {
    match macros::expand(ast) {
        Ok(expanded) => {
            *ast = expanded;
            Outcome::Applied
        }
        Err(reason) => Outcome::NotApplicable(reason),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_parsing() {
        let p = parse_format(r#""a=%d, %5ld%%\n""#).unwrap();
        assert_eq!(p.len(), 5);
        assert!(matches!(&p[0], FormatPiece::Text(t) if t == "a="));
        assert!(matches!(&p[3], FormatPiece::Arg { width: Some(w) } if w == "5"));
        assert!(matches!(&p[4], FormatPiece::Text(t) if t == "%\\n"));
        assert!(parse_format(r#""%f""#).is_none());
        assert!(parse_format(r#""%.2d""#).is_none());
        assert!(parse_format(r#""%ls""#).is_none());
    }

    #[test]
    fn comment_text_is_well_formed() {
        assert_eq!(comment_text("// x"), "// x");
        assert_eq!(comment_text("/* y */"), "/* y */");
        assert_eq!(comment_text("plain\ntext"), "// plain text");
        assert_eq!(comment_text("/* a */ b */"), "// /* a */ b */");
    }

    #[test]
    fn direct_continue_ignores_nested_loops() {
        let ast = crate::lang::parse_source("int f(){ for(;;){ while(1){ continue; } } for(;;){ if(1){continue;} } }").unwrap();
        let fors = ast.find_all(NodeKind::For);
        assert!(!has_direct_continue(&ast, ast.children(fors[0])[3]));
        assert!(has_direct_continue(&ast, ast.children(fors[1])[3]));
    }
}
