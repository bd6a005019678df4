//! Tokenizer for the supported C subset.
//!
//! Whitespace is never emitted, but every token carries its byte offset so
//! the original text (including the whitespace between tokens) can always be
//! recovered from the source. Comments and preprocessor lines are kept as
//! tokens of their own.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Keyword,
    Identifier,
    IntLiteral,
    StringLiteral,
    CharLiteral,
    Punct,
    Comment,
    PreprocessorDirective,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: usize,
    /// 1-based column (in characters) of the first character.
    pub column: usize,
    /// Byte offset of the first character in the source.
    pub offset: usize,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punct && self.text == p
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == k
    }

    pub fn end_offset(&self) -> usize {
        self.offset + self.text.len()
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?} at {}:{}", self.kind, self.text, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated string literal at {line}:{column}")]
    UnterminatedString { line: usize, column: usize },
    #[error("unterminated block comment at {line}:{column}")]
    UnterminatedComment { line: usize, column: usize },
    #[error("illegal character {ch:?} at {line}:{column}")]
    IllegalCharacter { ch: char, line: usize, column: usize },
}

pub const KEYWORDS: &[&str] = &[
    "auto", "bool", "break", "case", "char", "class", "const", "continue", "default", "do",
    "double", "else", "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long",
    "namespace", "register", "return", "short", "signed", "sizeof", "static", "struct", "switch",
    "template", "typedef", "union", "unsigned", "using", "void", "volatile", "while",
];

// Longest first so greedy matching picks `<<=` over `<<` over `<`.
const PUNCTS: &[&str] = &[
    "<<=", ">>=", "...", "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "+", "-", "*", "/", "%", "<", ">", "=", "!",
    "&", "|", "^", "~", "?", ":", ";", ",", ".", "(", ")", "{", "}", "[", "]",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn bump_while(&mut self, mut pred: impl FnMut(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.bump();
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_ascii_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_ascii_alphanumeric()
}

/// Splits `source` into tokens.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { src: source, pos: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();
    // A `#` only starts a directive when it is the first non-blank on its line.
    let mut at_line_start = true;

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            if c == '\n' {
                at_line_start = true;
            }
            cur.bump();
            continue;
        }
        let (start, line, column) = (cur.pos, cur.line, cur.column);
        let kind = if c == '#' && at_line_start {
            // Directive runs to end of line, honouring backslash continuations;
            // a trailing comment becomes its own token.
            let mut quote: Option<char> = None;
            loop {
                match cur.peek() {
                    None | Some('\n') => break,
                    Some('\\') if cur.peek_at(1) == Some('\n') => {
                        cur.bump();
                        cur.bump();
                    }
                    Some('\\') if quote.is_some() => {
                        cur.bump();
                        cur.bump();
                    }
                    Some(q @ ('"' | '\'')) => {
                        quote = match quote {
                            None => Some(q),
                            Some(open) if open == q => None,
                            other => other,
                        };
                        cur.bump();
                    }
                    Some('/') if quote.is_none() && matches!(cur.peek_at(1), Some('/' | '*')) => break,
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            while source[start..cur.pos].ends_with(|c: char| c == ' ' || c == '\t') {
                // keep trailing blanks out of the token text
                cur.pos -= 1;
                cur.column -= 1;
            }
            TokenKind::PreprocessorDirective
        } else if c == '/' && cur.peek_at(1) == Some('/') {
            cur.bump_while(|c| c != '\n');
            TokenKind::Comment
        } else if c == '/' && cur.peek_at(1) == Some('*') {
            cur.bump();
            cur.bump();
            loop {
                match cur.peek() {
                    None => return Err(LexError::UnterminatedComment { line, column }),
                    Some('*') if cur.peek_at(1) == Some('/') => {
                        cur.bump();
                        cur.bump();
                        break;
                    }
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            TokenKind::Comment
        } else if c == '"' || c == '\'' {
            cur.bump();
            loop {
                match cur.peek() {
                    None | Some('\n') => return Err(LexError::UnterminatedString { line, column }),
                    Some('\\') => {
                        cur.bump();
                        if cur.peek().is_none() {
                            return Err(LexError::UnterminatedString { line, column });
                        }
                        cur.bump();
                    }
                    Some(q) if q == c => {
                        cur.bump();
                        break;
                    }
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            if c == '"' {
                TokenKind::StringLiteral
            } else {
                TokenKind::CharLiteral
            }
        } else if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            // Numbers are lexed loosely: digits, letters (hex digits, suffixes,
            // exponents) and dots.
            cur.bump_while(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_');
            TokenKind::IntLiteral
        } else if is_ident_start(c) {
            cur.bump_while(is_ident_continue);
            if is_keyword(&source[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if let Some(p) = PUNCTS.iter().find(|p| cur.rest().starts_with(**p)) {
            for _ in 0..p.len() {
                cur.bump();
            }
            TokenKind::Punct
        } else {
            return Err(LexError::IllegalCharacter { ch: c, line, column });
        };
        at_line_start = false;
        tokens.push(Token { kind, text: source[start..cur.pos].to_string(), line, column, offset: start });
    }
    Ok(tokens)
}

/// Rebuilds the source text from a token stream and the source it came from:
/// token texts interleaved with the original inter-token whitespace.
pub fn reconstruct(source: &str, tokens: &[Token]) -> String {
    let mut out = String::with_capacity(source.len());
    let mut pos = 0;
    for t in tokens {
        out.push_str(&source[pos..t.offset]);
        out.push_str(&t.text);
        pos = t.end_offset();
    }
    out.push_str(&source[pos..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds_texts(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn minimal_declaration() {
        use TokenKind::*;
        assert_eq!(
            kinds_texts("int x;"),
            vec![(Keyword, "int".into()), (Identifier, "x".into()), (Punct, ";".into())]
        );
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").unwrap().is_empty());
    }

    #[test]
    fn function_header_line() {
        use TokenKind::*;
        let got = kinds_texts("void foobar(int keq) {");
        let want = [
            (Keyword, "void"),
            (Identifier, "foobar"),
            (Punct, "("),
            (Keyword, "int"),
            (Identifier, "keq"),
            (Punct, ")"),
            (Punct, "{"),
        ];
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want.iter()) {
            assert_eq!((g.0, g.1.as_str()), *w);
        }
    }

    #[test]
    fn comments_and_directives_are_tokens() {
        let toks = tokenize("#include <stdio.h>\n// hi\nint a; /* b\n c */").unwrap();
        assert_eq!(toks[0].kind, TokenKind::PreprocessorDirective);
        assert_eq!(toks[0].text, "#include <stdio.h>");
        assert_eq!(toks[1].kind, TokenKind::Comment);
        assert_eq!(toks[1].text, "// hi");
        assert_eq!(toks.last().unwrap().kind, TokenKind::Comment);
        assert_eq!(toks.last().unwrap().line, 3);
    }

    #[test]
    fn hash_inside_line_is_not_directive() {
        let toks = tokenize("a # b");
        assert!(matches!(toks, Err(LexError::IllegalCharacter { ch: '#', line: 1, column: 3 })));
    }

    #[test]
    fn longest_punct_wins() {
        let toks = kinds_texts("a <<= b << c < d; std::cout");
        let texts: Vec<_> = toks.iter().map(|t| t.1.as_str()).collect();
        assert_eq!(texts, ["a", "<<=", "b", "<<", "c", "<", "d", ";", "std", "::", "cout"]);
    }

    #[test]
    fn error_positions() {
        assert_eq!(
            tokenize("int a;\n  \"abc"),
            Err(LexError::UnterminatedString { line: 2, column: 3 })
        );
        assert_eq!(tokenize("x /* never"), Err(LexError::UnterminatedComment { line: 1, column: 3 }));
        assert_eq!(tokenize("x\n @"), Err(LexError::IllegalCharacter { ch: '@', line: 2, column: 2 }));
    }

    #[test]
    fn escapes_in_literals() {
        let toks = kinds_texts(r#"printf("a\"b\n", '\'');"#);
        assert_eq!(toks[2], (TokenKind::StringLiteral, r#""a\"b\n""#.to_string()));
        assert_eq!(toks[4], (TokenKind::CharLiteral, r"'\''".to_string()));
    }

    #[test]
    fn positions_strictly_increase() {
        let src = "int main() {\n  int a = 1; // c\n  return a;\n}\n";
        let toks = tokenize(src).unwrap();
        for w in toks.windows(2) {
            assert!((w[0].line, w[0].column) < (w[1].line, w[1].column));
        }
        assert_eq!(reconstruct(src, &toks), src);
    }
}
