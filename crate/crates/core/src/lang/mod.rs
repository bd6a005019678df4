//! Lexer, parser, renderer and canonical token view of the C subset.

pub mod ast;
pub mod canonical;
pub mod lexer;
pub mod parser;
pub mod render;

pub use ast::{Ast, AstNode, Comment, CommentSide, NodeId, NodeKind};
pub use canonical::{canonical_tokens, CanonicalToken};
pub use lexer::{reconstruct, tokenize, LexError, Token, TokenKind};
pub use parser::{parse, parse_source, ParseError, SourceError};
pub use render::{render, render_expr};
