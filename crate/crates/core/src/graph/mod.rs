//! Graph and path-context views of a syntax tree.
//!
//! [`build_graph`] overlays control flow and dependence edges on the tree:
//!
//! * `Ast`: parent to child.
//! * `Cfg`: consecutive statements of a block, `if` to the first statement
//!   of each branch, loop header to the first body statement and the last
//!   body statement back to the header.
//! * `PdgData`: declaration to every use of the declared name it reaches,
//!   resolved with block scoping and shadowing.
//! * `PdgControl`: condition of an `if`/`while`/`for` to every statement
//!   directly inside the governed block.

mod paths;

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::lang::{Ast, NodeId, NodeKind};

pub use paths::{extract_path_contexts, PathContext, PathError, DEFAULT_MAX_CONTEXTS, DEFAULT_MAX_PATH_LEN};

/// Label given to every identifier in the encoder view of a graph.
pub const VAR_PLACEHOLDER: &str = "VAR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    Ast,
    Cfg,
    PdgData,
    PdgControl,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Ast => "ast",
            EdgeKind::Cfg => "cfg",
            EdgeKind::PdgData => "pdg_data",
            EdgeKind::PdgControl => "pdg_control",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
}

/// Nodes are numbered by the preorder position of their tree node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeGraph {
    pub labels: Vec<String>,
    pub edges: Vec<Edge>,
}

impl CodeGraph {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edges_of(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    /// Replaces identifier labels by [`VAR_PLACEHOLDER`].
    pub fn anonymize_identifiers(&mut self) {
        let prefix = format!("{}:", NodeKind::Identifier.name());
        for l in &mut self.labels {
            if l.starts_with(&prefix) {
                *l = format!("{prefix}{VAR_PLACEHOLDER}");
            }
        }
    }

    /// Undirected neighbour lists over all edge kinds, without duplicates
    /// and without self loops.
    pub fn undirected_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.labels.len()];
        for e in &self.edges {
            if e.src != e.dst {
                adj[e.src].push(e.dst);
                adj[e.dst].push(e.src);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    /// Graphviz rendering; the edge kind is stored in a `kind` attribute.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph code {\n");
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", l.replace('\\', "\\\\").replace('"', "\\\""));
        }
        for e in &self.edges {
            let style = match e.kind {
                EdgeKind::Ast => "solid",
                EdgeKind::Cfg => "bold",
                EdgeKind::PdgData => "dashed",
                EdgeKind::PdgControl => "dotted",
            };
            let _ = writeln!(out, "  n{} -> n{} [kind={}, style={style}];", e.src, e.dst, e.kind.name());
        }
        out.push_str("}\n");
        out
    }
}

/// Graph label of a tree node: the kind, with the text appended for leaves
/// and for operators.
pub fn node_label(ast: &Ast, id: NodeId) -> String {
    let n = ast.node(id);
    let with_text = n.children.is_empty() || matches!(n.kind, NodeKind::BinaryOp | NodeKind::UnaryOp | NodeKind::Assign);
    if with_text && !n.text.is_empty() {
        format!("{}:{}", n.kind.name(), n.text)
    } else {
        n.kind.name().to_string()
    }
}

pub fn build_graph(ast: &Ast) -> CodeGraph {
    let order = ast.preorder();
    let index: HashMap<NodeId, usize> = order.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let labels = order.iter().map(|&id| node_label(ast, id)).collect();
    let mut b = Builder { ast, index, edges: Vec::new() };
    for &id in &order {
        for &c in ast.children(id) {
            b.edge(id, c, EdgeKind::Ast);
        }
    }
    for &id in &order {
        b.control_flow(id);
    }
    let mut scopes = Scopes::default();
    b.data_flow(ast.root, &mut scopes);
    CodeGraph { labels, edges: b.edges }
}

/// Graph as fed to encoders: identifiers anonymized.
pub fn encoder_graph(ast: &Ast) -> CodeGraph {
    let mut g = build_graph(ast);
    g.anonymize_identifiers();
    g
}

struct Builder<'a> {
    ast: &'a Ast,
    index: HashMap<NodeId, usize>,
    edges: Vec<Edge>,
}

/// Lexical scopes: a name maps to its declaration, or to `None` when a
/// parameter shadows it (parameters produce no data edges).
#[derive(Default)]
struct Scopes {
    frames: Vec<HashMap<String, Option<NodeId>>>,
}

impl Scopes {
    fn lookup(&self, name: &str) -> Option<NodeId> {
        self.frames.iter().rev().find_map(|f| f.get(name)).copied().flatten()
    }

    fn declare(&mut self, name: &str, decl: Option<NodeId>) {
        if let Some(f) = self.frames.last_mut() {
            f.insert(name.to_string(), decl);
        }
    }
}

impl Builder<'_> {
    fn edge(&mut self, src: NodeId, dst: NodeId, kind: EdgeKind) {
        self.edges.push(Edge { src: self.index[&src], dst: self.index[&dst], kind });
    }

    fn control_flow(&mut self, id: NodeId) {
        let ast = self.ast;
        let ch = ast.children(id);
        match ast.kind(id) {
            NodeKind::Block => {
                for w in ch.windows(2) {
                    self.edge(w[0], w[1], EdgeKind::Cfg);
                }
            }
            NodeKind::If => {
                for &branch in &ch[1..] {
                    if let Some(&first) = ast.children(branch).first() {
                        self.edge(id, first, EdgeKind::Cfg);
                    }
                }
                for &branch in &ch[1..] {
                    self.governs(ch[0], branch);
                }
            }
            NodeKind::While | NodeKind::For => {
                let (cond, body) = if ast.kind(id) == NodeKind::While { (ch[0], ch[1]) } else { (ch[1], ch[3]) };
                let items = ast.children(body);
                if let (Some(&first), Some(&last)) = (items.first(), items.last()) {
                    self.edge(id, first, EdgeKind::Cfg);
                    self.edge(last, id, EdgeKind::Cfg);
                }
                self.governs(cond, body);
            }
            _ => {}
        }
    }

    fn governs(&mut self, cond: NodeId, block: NodeId) {
        for &s in self.ast.children(block) {
            self.edge(cond, s, EdgeKind::PdgControl);
        }
    }

    fn data_flow(&mut self, id: NodeId, scopes: &mut Scopes) {
        let ast = self.ast;
        let ch = ast.children(id).to_vec();
        match ast.kind(id) {
            NodeKind::TranslationUnit | NodeKind::Block | NodeKind::For => {
                scopes.frames.push(HashMap::new());
                for c in ch {
                    self.data_flow(c, scopes);
                }
                scopes.frames.pop();
            }
            NodeKind::FunctionDef => {
                // parameters and body share one scope
                scopes.frames.push(HashMap::new());
                for &c in &ch[1..] {
                    if ast.kind(c) == NodeKind::Block {
                        for &s in ast.children(c) {
                            self.data_flow(s, scopes);
                        }
                    } else {
                        self.data_flow(c, scopes);
                    }
                }
                scopes.frames.pop();
            }
            NodeKind::Param => {
                if let Some(name) = ast.declared_name(id) {
                    scopes.declare(name, None);
                }
                for &d in ast.decl_dims(id) {
                    self.data_flow(d, scopes);
                }
            }
            NodeKind::Decl => {
                for &d in ast.decl_dims(id) {
                    self.data_flow(d, scopes);
                }
                if let Some(name) = ast.declared_name(id) {
                    scopes.declare(name, Some(id));
                }
                if let Some(init) = ast.decl_init(id) {
                    self.data_flow(init, scopes);
                }
            }
            NodeKind::Identifier => {
                if let Some(decl) = scopes.lookup(&ast.node(id).text) {
                    self.edge(decl, id, EdgeKind::PdgData);
                }
            }
            _ => {
                for c in ch {
                    self.data_flow(c, scopes);
                }
            }
        }
    }
}
