//! Token-level `#define` expansion.

use std::collections::{HashMap, HashSet};

use crate::lang::lexer::{self, TokenKind};
use crate::lang::{parse_source, render, Ast, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Tok {
    kind: TokenKind,
    text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct MacroDef {
    pub name: String,
    /// `None` for object-like macros.
    pub params: Option<Vec<String>>,
    body: Vec<Tok>,
}

impl MacroDef {
    /// Parses the text following `#define`.
    pub fn parse(text: &str) -> Option<MacroDef> {
        let text = text.trim_start();
        let name_len = text.find(|c: char| !(c == '_' || c.is_ascii_alphanumeric())).unwrap_or(text.len());
        let name = &text[..name_len];
        if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
            return None;
        }
        let rest = &text[name_len..];
        let (params, body) = if let Some(after) = rest.strip_prefix('(') {
            let close = after.find(')')?;
            let list = after[..close].trim();
            let params: Vec<String> =
                if list.is_empty() { Vec::new() } else { list.split(',').map(|p| p.trim().to_string()).collect() };
            if params.iter().any(|p| p.is_empty() || !p.chars().all(|c| c == '_' || c.is_ascii_alphanumeric())) {
                return None;
            }
            (Some(params), &after[close + 1..])
        } else {
            (None, rest)
        };
        let body = lexer::tokenize(body)
            .ok()?
            .into_iter()
            .filter(|t| t.kind != TokenKind::Comment)
            .map(|t| Tok { kind: t.kind, text: t.text })
            .collect();
        Some(MacroDef { name: name.to_string(), params, body })
    }
}

/// Substitutes every expandable macro at its use sites and drops its
/// directive. Fails with a reason when nothing can be expanded or the
/// result leaves the supported subset.
pub(crate) fn expand(ast: &Ast) -> Result<Ast, String> {
    let directives = ast.find_all(NodeKind::MacroDefine);
    if directives.is_empty() {
        return Err("no applicable site".to_string());
    }
    let mut defs: HashMap<String, MacroDef> = HashMap::new();
    let mut removable = Vec::new();
    let mut reasons = Vec::new();
    for &d in &directives {
        let text = &ast.node(d).text;
        if text.contains('#') {
            reasons.push("macro uses # or ## operators".to_string());
            continue;
        }
        match MacroDef::parse(text) {
            Some(def) if defs.contains_key(&def.name) => return Err(format!("macro `{}` is redefined", def.name)),
            Some(def) => {
                defs.insert(def.name.clone(), def);
                removable.push(d);
            }
            None => reasons.push(format!("unsupported macro definition `{text}`")),
        }
    }
    if defs.is_empty() {
        return Err(reasons.join("; "));
    }

    let mut stripped = ast.clone();
    let root = stripped.root;
    stripped.node_mut(root).children.retain(|c| !removable.contains(c));
    stripped.compact();
    let source = render(&stripped);
    let tokens = lexer::tokenize(&source).map_err(|e| e.to_string())?;
    let toks: Vec<Tok> = tokens.iter().map(|t| Tok { kind: t.kind, text: t.text.clone() }).collect();

    let mut out = String::with_capacity(source.len());
    let mut pos = 0;
    let mut i = 0;
    while i < toks.len() {
        out.push_str(&source[pos..tokens[i].offset]);
        let end = invocation_end(&toks, i, &defs)?;
        match end {
            Some(j) => {
                let expanded = expand_seq(&toks[i..=j], &defs, &HashSet::new())?;
                let joined: Vec<&str> = expanded.iter().map(|t| t.text.as_str()).collect();
                out.push_str(&joined.join(" "));
                pos = tokens[j].end_offset();
                i = j + 1;
            }
            None => {
                out.push_str(&tokens[i].text);
                pos = tokens[i].end_offset();
                i += 1;
            }
        }
    }
    out.push_str(&source[pos..]);
    parse_source(&out).map_err(|e| format!("expanded source does not parse: {e}"))
}

/// Index of the last token of a macro invocation starting at `i`, if any.
fn invocation_end(toks: &[Tok], i: usize, defs: &HashMap<String, MacroDef>) -> Result<Option<usize>, String> {
    let t = &toks[i];
    if t.kind != TokenKind::Identifier {
        return Ok(None);
    }
    let Some(def) = defs.get(&t.text) else { return Ok(None) };
    if def.params.is_none() {
        return Ok(Some(i));
    }
    if toks.get(i + 1).map(|n| n.text.as_str()) != Some("(") {
        return Ok(None);
    }
    let mut depth = 0usize;
    for (j, n) in toks.iter().enumerate().skip(i + 1) {
        if n.kind != TokenKind::Punct {
            continue;
        }
        match n.text.as_str() {
            "(" => depth += 1,
            ")" => {
                depth -= 1;
                if depth == 0 {
                    return Ok(Some(j));
                }
            }
            _ => {}
        }
    }
    Err(format!("unterminated invocation of `{}`", t.text))
}

fn expand_seq(toks: &[Tok], defs: &HashMap<String, MacroDef>, hide: &HashSet<String>) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i];
        let end = if hide.contains(&t.text) { None } else { invocation_end(toks, i, defs)? };
        let Some(j) = end else {
            out.push(t.clone());
            i += 1;
            continue;
        };
        let def = &defs[&t.text];
        let mut inner_hide = hide.clone();
        inner_hide.insert(def.name.clone());
        let body = match &def.params {
            None => def.body.clone(),
            Some(params) => {
                let args = split_args(&toks[i + 2..j]);
                let args = if params.is_empty() && args.len() == 1 && args[0].is_empty() { Vec::new() } else { args };
                if args.len() != params.len() {
                    return Err(format!("`{}` expects {} arguments, got {}", def.name, params.len(), args.len()));
                }
                let mut expanded_args = Vec::with_capacity(args.len());
                for a in args {
                    expanded_args.push(expand_seq(a, defs, hide)?);
                }
                let mut body = Vec::new();
                for bt in &def.body {
                    match params.iter().position(|p| bt.kind == TokenKind::Identifier && *p == bt.text) {
                        Some(k) => body.extend(expanded_args[k].iter().cloned()),
                        None => body.push(bt.clone()),
                    }
                }
                body
            }
        };
        out.extend(expand_seq(&body, defs, &inner_hide)?);
        i = j + 1;
    }
    Ok(out)
}

/// Splits the tokens between an invocation's parentheses at top-level commas.
fn split_args(toks: &[Tok]) -> Vec<&[Tok]> {
    let mut args = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (k, t) in toks.iter().enumerate() {
        if t.kind != TokenKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "(" | "[" => depth += 1,
            ")" | "]" => depth = depth.saturating_sub(1),
            "," if depth == 0 => {
                args.push(&toks[start..k]);
                start = k + 1;
            }
            _ => {}
        }
    }
    args.push(&toks[start..]);
    args
}
