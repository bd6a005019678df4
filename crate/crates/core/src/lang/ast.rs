//! Arena-allocated syntax tree for the C subset.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    TranslationUnit,
    Include,
    MacroDefine,
    FunctionDef,
    Param,
    Block,
    Decl,
    If,
    While,
    For,
    Return,
    ExprStmt,
    Break,
    Continue,
    /// Placeholder for an omitted part, e.g. the missing clauses of `for (;;)`.
    Empty,
    Call,
    BinaryOp,
    UnaryOp,
    Assign,
    Identifier,
    Literal,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::TranslationUnit => "TranslationUnit",
            NodeKind::Include => "Include",
            NodeKind::MacroDefine => "MacroDefine",
            NodeKind::FunctionDef => "FunctionDef",
            NodeKind::Param => "Param",
            NodeKind::Block => "Block",
            NodeKind::Decl => "Decl",
            NodeKind::If => "If",
            NodeKind::While => "While",
            NodeKind::For => "For",
            NodeKind::Return => "Return",
            NodeKind::ExprStmt => "ExprStmt",
            NodeKind::Break => "Break",
            NodeKind::Continue => "Continue",
            NodeKind::Empty => "Empty",
            NodeKind::Call => "Call",
            NodeKind::BinaryOp => "BinaryOp",
            NodeKind::UnaryOp => "UnaryOp",
            NodeKind::Assign => "Assign",
            NodeKind::Identifier => "Identifier",
            NodeKind::Literal => "Literal",
        }
    }

    /// Kinds that may appear as an element of a block.
    pub fn is_statement(self) -> bool {
        matches!(
            self,
            NodeKind::Block
                | NodeKind::Decl
                | NodeKind::If
                | NodeKind::While
                | NodeKind::For
                | NodeKind::Return
                | NodeKind::ExprStmt
                | NodeKind::Break
                | NodeKind::Continue
                | NodeKind::Empty
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One node of the tree.
///
/// Payload by kind:
///
/// | kind | `text` | `ty` | children |
/// |------|--------|------|----------|
/// | `Include` | `<stdio.h>` / `"x.h"` | | |
/// | `MacroDefine` | everything after `#define` | | |
/// | `FunctionDef` | | return type | name, params…, body block (absent for a prototype) |
/// | `Param` | | type | name (absent when unnamed), `dims` array bounds |
/// | `Decl` | | type | name, `dims` array bounds, optional initializer |
/// | `If` | | | cond, then block, optional else block |
/// | `While` | | | cond, body block |
/// | `For` | | | init, cond, step (each possibly `Empty`), body block |
/// | `Call` | | | callee identifier, args… |
/// | `BinaryOp` / `Assign` | operator (`[]` for indexing) | | lhs, rhs |
/// | `UnaryOp` | operator, `post++` / `post--` for postfix | | operand |
/// | `Identifier` / `Literal` | lexical text | | |
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    pub text: String,
    pub ty: String,
    pub dims: usize,
}

impl AstNode {
    pub fn new(kind: NodeKind) -> Self {
        AstNode { kind, children: Vec::new(), text: String::new(), ty: String::new(), dims: 0 }
    }

    pub fn with_text(kind: NodeKind, text: impl Into<String>) -> Self {
        AstNode { text: text.into(), ..AstNode::new(kind) }
    }

    pub fn with_children(mut self, children: Vec<NodeId>) -> Self {
        self.children = children;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommentSide {
    Before,
    After,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub anchor: NodeId,
    pub side: CommentSide,
    /// Full comment text including the `//` or `/* */` delimiters.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ast {
    pub root: NodeId,
    pub nodes: Vec<AstNode>,
    pub comments: Vec<Comment>,
}

impl Default for Ast {
    fn default() -> Self {
        Ast::new()
    }
}

impl Ast {
    /// A tree holding only an empty translation unit.
    pub fn new() -> Self {
        Ast { root: NodeId(0), nodes: vec![AstNode::new(NodeKind::TranslationUnit)], comments: Vec::new() }
    }

    pub fn add(&mut self, node: AstNode) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    pub fn leaf(&mut self, kind: NodeKind, text: impl Into<String>) -> NodeId {
        self.add(AstNode::with_text(kind, text))
    }

    pub fn node(&self, id: NodeId) -> &AstNode {
        &self.nodes[id.index()]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut AstNode {
        &mut self.nodes[id.index()]
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.node(id).kind
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.node(id).children
    }

    /// Nodes reachable from the root, parents before children, children in order.
    pub fn preorder(&self) -> Vec<NodeId> {
        self.preorder_from(self.root)
    }

    pub fn preorder_from(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![start];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.children(id).iter().rev().copied());
        }
        out
    }

    /// Parent of every reachable node (the root maps to `None`).
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parents = vec![None; self.nodes.len()];
        for id in self.preorder() {
            for &c in self.children(id) {
                parents[c.index()] = Some(id);
            }
        }
        parents
    }

    /// Text used for a node when it is a leaf of the tree.
    pub fn leaf_text(&self, id: NodeId) -> &str {
        let n = self.node(id);
        if n.text.is_empty() {
            n.kind.name()
        } else {
            &n.text
        }
    }

    /// Name of a function definition, declaration or parameter.
    pub fn declared_name(&self, id: NodeId) -> Option<&str> {
        let n = self.node(id);
        match n.kind {
            NodeKind::FunctionDef | NodeKind::Decl | NodeKind::Param => n
                .children
                .first()
                .filter(|c| self.kind(**c) == NodeKind::Identifier)
                .map(|c| self.node(*c).text.as_str()),
            _ => None,
        }
    }

    /// Body block of a function definition, `None` for prototypes.
    pub fn function_body(&self, id: NodeId) -> Option<NodeId> {
        let n = self.node(id);
        if n.kind != NodeKind::FunctionDef {
            return None;
        }
        n.children.last().copied().filter(|c| self.kind(*c) == NodeKind::Block)
    }

    pub fn function_params(&self, id: NodeId) -> Vec<NodeId> {
        self.children(id).iter().copied().filter(|c| self.kind(*c) == NodeKind::Param).collect()
    }

    /// Array bounds of a `Decl` or `Param`.
    pub fn decl_dims(&self, id: NodeId) -> &[NodeId] {
        let n = self.node(id);
        let start = usize::from(n.children.first().is_some_and(|c| self.kind(*c) == NodeKind::Identifier));
        &n.children[start..start + n.dims]
    }

    /// Initializer of a `Decl`.
    pub fn decl_init(&self, id: NodeId) -> Option<NodeId> {
        let n = self.node(id);
        let start = usize::from(n.children.first().is_some_and(|c| self.kind(*c) == NodeKind::Identifier));
        n.children.get(start + n.dims).copied()
    }

    /// Copies the subtree under `id` into fresh nodes of the same arena.
    pub fn deep_copy(&mut self, id: NodeId) -> NodeId {
        let mut node = self.node(id).clone();
        node.children = node.children.iter().map(|&c| self.deep_copy(c)).collect();
        self.add(node)
    }

    /// Rebuilds the arena so it holds exactly the reachable nodes in preorder.
    /// Comments anchored to unreachable nodes are dropped.
    pub fn compact(&mut self) {
        let order = self.preorder();
        let mut remap = vec![None; self.nodes.len()];
        for (new, old) in order.iter().enumerate() {
            remap[old.index()] = Some(NodeId(new as u32));
        }
        let nodes = order
            .iter()
            .map(|old| {
                let mut n = self.node(*old).clone();
                for c in &mut n.children {
                    *c = remap[c.index()].expect("child of reachable node is reachable");
                }
                n
            })
            .collect();
        self.nodes = nodes;
        self.root = NodeId(0);
        self.comments = std::mem::take(&mut self.comments)
            .into_iter()
            .filter_map(|c| remap[c.anchor.index()].map(|anchor| Comment { anchor, ..c }))
            .collect();
    }

    /// Checks the tree invariants: single root, no cycles, every reachable
    /// non-root node has exactly one parent, shape rules per kind.
    pub fn validate(&self) -> Result<(), String> {
        let mut parent_count = vec![0usize; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if id.index() >= self.nodes.len() {
                return Err(format!("dangling node handle {}", id.0));
            }
            if seen[id.index()] {
                return Err(format!("node {} reached twice", id.0));
            }
            seen[id.index()] = true;
            for &c in self.children(id) {
                if c.index() >= self.nodes.len() {
                    return Err(format!("dangling node handle {}", c.0));
                }
                parent_count[c.index()] += 1;
                stack.push(c);
            }
        }
        if parent_count[self.root.index()] != 0 {
            return Err("root has a parent".into());
        }
        for (i, &n) in parent_count.iter().enumerate() {
            if seen[i] && i != self.root.index() && n != 1 {
                return Err(format!("node {i} has {n} parents"));
            }
        }
        for id in self.preorder() {
            let n = self.node(id);
            let arity = n.children.len();
            let ok = match n.kind {
                NodeKind::If => arity == 2 || arity == 3,
                NodeKind::While => arity == 2,
                NodeKind::For => arity == 4,
                NodeKind::Identifier => !n.text.is_empty() && arity == 0,
                NodeKind::BinaryOp | NodeKind::Assign => arity == 2,
                NodeKind::UnaryOp => arity == 1,
                _ => true,
            };
            if !ok {
                return Err(format!("{} node {} has {} children", n.kind, id.0, arity));
            }
        }
        Ok(())
    }

    /// Node-for-node structural equality of two trees (kinds, payloads and
    /// shape; arena layout and comments are ignored).
    pub fn structurally_equal(&self, other: &Ast) -> bool {
        fn eq(a: &Ast, x: NodeId, b: &Ast, y: NodeId) -> bool {
            let (n, m) = (a.node(x), b.node(y));
            n.kind == m.kind
                && n.text == m.text
                && n.ty == m.ty
                && n.dims == m.dims
                && n.children.len() == m.children.len()
                && n.children.iter().zip(&m.children).all(|(c, d)| eq(a, *c, b, *d))
        }
        eq(self, self.root, other, other.root)
    }

    /// Number of reachable nodes of each kind.
    pub fn kind_multiset(&self) -> BTreeMap<NodeKind, usize> {
        let mut m = BTreeMap::new();
        for id in self.preorder() {
            *m.entry(self.kind(id)).or_insert(0) += 1;
        }
        m
    }

    /// All reachable nodes of one kind, in preorder.
    pub fn find_all(&self, kind: NodeKind) -> Vec<NodeId> {
        self.preorder().into_iter().filter(|id| self.kind(*id) == kind).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Ast {
        let mut ast = Ast::new();
        let a = ast.leaf(NodeKind::Identifier, "a");
        let one = ast.leaf(NodeKind::Literal, "1");
        let asg = ast.add(AstNode::with_text(NodeKind::Assign, "=").with_children(vec![a, one]));
        let stmt = ast.add(AstNode::new(NodeKind::ExprStmt).with_children(vec![asg]));
        let root = ast.root;
        ast.node_mut(root).children.push(stmt);
        ast
    }

    #[test]
    fn compact_preorders_and_keeps_structure() {
        let mut ast = tiny();
        let before = ast.clone();
        ast.leaf(NodeKind::Identifier, "garbage");
        ast.compact();
        assert_eq!(ast.nodes.len(), 5);
        assert!(ast.structurally_equal(&before));
        assert_eq!(ast.preorder(), (0..5).map(NodeId).collect::<Vec<_>>());
        ast.validate().unwrap();
    }

    #[test]
    fn validate_rejects_shared_child() {
        let mut ast = tiny();
        let shared = ast.children(ast.root)[0];
        let root = ast.root;
        ast.node_mut(root).children.push(shared);
        assert!(ast.validate().is_err());
    }

    #[test]
    fn deep_copy_is_independent() {
        let mut ast = tiny();
        let stmt = ast.children(ast.root)[0];
        let copy = ast.deep_copy(stmt);
        assert_ne!(copy, stmt);
        let leaf = ast.preorder_from(copy)[2];
        ast.node_mut(leaf).text = "b".into();
        assert_eq!(ast.node(ast.preorder_from(stmt)[2]).text, "a");
    }
}
