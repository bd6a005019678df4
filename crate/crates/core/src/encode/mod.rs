//! Trainable encoders mapping a program representation to a fixed-width
//! embedding, with exact reverse-mode gradients.
//!
//! | kind | input | forward |
//! |------|-------|---------|
//! | `Bow` | token symbols | `W2·tanh(W1·x + b1) + b2`, `x` the mean symbol row |
//! | `Paths` | path contexts | mean over contexts of `Wo·tanh(Wc·m_c + bc) + bo`, `m_c` the mean row of the context's symbols |
//! | `Gcn` | code graph | `K` residual steps `H ← H + σ(Â·H·Wₖᵀ)`, node mean, then `Wo·h + bo` |
//!
//! Symbols are looked up in a hashed vocabulary of fixed size.

mod checkpoint;
mod matrix;
mod model;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{load_params, save_params, CheckpointError};
pub use matrix::{axpy, dot, norm, sigmoid, Matrix};
pub use model::{backward, encode, encode_bow, encode_graph, encode_paths, forward, gcn_layer, ForwardRecord};

use crate::graph::{CodeGraph, PathContext};
use crate::lang::{Token, TokenKind};

pub const DEFAULT_DIM: usize = 128;
pub const DEFAULT_VOCAB: usize = 4096;
pub const DEFAULT_GCN_DEPTH: usize = 6;

pub type Embedding = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    Bow,
    Paths,
    Gcn,
}

impl EncoderKind {
    pub const ALL: [EncoderKind; 3] = [EncoderKind::Bow, EncoderKind::Paths, EncoderKind::Gcn];

    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::Bow => "bow",
            EncoderKind::Paths => "paths",
            EncoderKind::Gcn => "gcn",
        }
    }
}

impl std::str::FromStr for EncoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        EncoderKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown encoder `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("encoder input is empty")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("forward record of version {record} does not match parameters of version {params}")]
    StaleRecord { record: u64, params: u64 },
    #[error("{params:?} parameters cannot encode {input:?} input")]
    WrongInput { params: EncoderKind, input: EncoderKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub kind: EncoderKind,
    pub dim: usize,
    pub vocab: usize,
    /// Number of graph layers; ignored by the other kinds.
    pub depth: usize,
}

impl EncoderConfig {
    pub fn new(kind: EncoderKind) -> Self {
        EncoderConfig { kind, dim: DEFAULT_DIM, vocab: DEFAULT_VOCAB, depth: DEFAULT_GCN_DEPTH }
    }

    fn layer_count(&self) -> usize {
        match self.kind {
            EncoderKind::Bow | EncoderKind::Paths => 2,
            EncoderKind::Gcn => self.depth + 1,
        }
    }

    fn bias_count(&self) -> usize {
        match self.kind {
            EncoderKind::Bow | EncoderKind::Paths => 2,
            EncoderKind::Gcn => 1,
        }
    }
}

/// Parameters of one encoder.
///
/// `layers` holds `[W1, W2]` for `Bow`, `[Wc, Wo]` for `Paths` and
/// `[W1 … WK, Wo]` for `Gcn`; `biases` holds `[b1, b2]`, `[bc, bo]` and
/// `[bo]` respectively. `version` changes on every update so stale forward
/// records are detected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    pub kind: EncoderKind,
    pub token_table: Matrix,
    pub layers: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    pub version: u64,
}

impl EncoderParams {
    /// Token rows with unit variance, weights uniform in `[-1/√d, 1/√d]`,
    /// biases zero. The graph readout map gets zero-mean rows.
    pub fn init(config: &EncoderConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.dim;
        let bound = 1.0 / (d as f64).sqrt();
        let mut fill = |rows: usize, cols: usize, bound: f64| Matrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| rng.gen_range(-bound..=bound)).collect(),
        };
        let token_table = fill(config.vocab, d, 3f64.sqrt());
        let mut layers: Vec<Matrix> = (0..config.layer_count()).map(|_| fill(d, d, bound)).collect();
        if config.kind == EncoderKind::Gcn {
            // Every sigmoid layer adds roughly 0.5 to each coordinate, so the
            // pooled state carries a large all-ones offset. Zero-mean rows in
            // the readout map send that offset to zero.
            let readout = layers.last_mut().expect("gcn has a readout layer");
            for r in 0..d {
                let row = readout.row_mut(r);
                let mean = row.iter().sum::<f64>() / d as f64;
                row.iter_mut().for_each(|w| *w -= mean);
            }
        }
        let biases = (0..config.bias_count()).map(|_| vec![0.0; d]).collect();
        EncoderParams { kind: config.kind, token_table, layers, biases, version: 0 }
    }

    pub fn dim(&self) -> usize {
        self.token_table.cols
    }

    pub fn vocab(&self) -> usize {
        self.token_table.rows
    }

    pub fn config(&self) -> EncoderConfig {
        EncoderConfig {
            kind: self.kind,
            dim: self.dim(),
            vocab: self.vocab(),
            depth: if self.kind == EncoderKind::Gcn { self.layers.len() - 1 } else { DEFAULT_GCN_DEPTH },
        }
    }

    pub fn is_finite(&self) -> bool {
        self.token_table.is_finite() && self.layers.iter().all(Matrix::is_finite) && self.biases.iter().flatten().all(|v| v.is_finite())
    }

    /// `θ ← θ − lr·g`; bumps the version.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (&r, g) in &grads.token_rows {
            axpy(self.token_table.row_mut(r), -lr, g);
        }
        for (w, g) in self.layers.iter_mut().zip(&grads.layers) {
            w.add_scaled(-lr, g);
        }
        for (b, g) in self.biases.iter_mut().zip(&grads.biases) {
            axpy(b, -lr, g);
        }
        self.version += 1;
    }

    /// Flat view of every parameter, in checkpoint order.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = self.token_table.data.clone();
        for l in &self.layers {
            out.extend_from_slice(&l.data);
        }
        for b in &self.biases {
            out.extend_from_slice(b);
        }
        out
    }
}

/// Gradient with the shape of [`EncoderParams`]; token-table rows are kept
/// sparsely since a sample touches only a few.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradients {
    pub token_rows: BTreeMap<usize, Vec<f64>>,
    pub layers: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &EncoderParams) -> Self {
        Gradients {
            token_rows: BTreeMap::new(),
            layers: params.layers.iter().map(|l| Matrix::zeros(l.rows, l.cols)).collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn token_row_mut(&mut self, row: usize, dim: usize) -> &mut Vec<f64> {
        self.token_rows.entry(row).or_insert_with(|| vec![0.0; dim])
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (&r, g) in &other.token_rows {
            let dim = g.len();
            axpy(self.token_row_mut(r, dim), 1.0, g);
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.add_scaled(1.0, b);
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            axpy(a, 1.0, b);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for g in self.token_rows.values_mut() {
            g.iter_mut().for_each(|v| *v *= s);
        }
        for l in &mut self.layers {
            l.data.iter_mut().for_each(|v| *v *= s);
        }
        for b in &mut self.biases {
            b.iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.token_rows.values().flatten().all(|v| *v == 0.0)
            && self.layers.iter().all(|l| l.data.iter().all(|v| *v == 0.0))
            && self.biases.iter().flatten().all(|v| *v == 0.0)
    }

    /// Dense view aligned with [`EncoderParams::flat`].
    pub fn flat(&self, params: &EncoderParams) -> Vec<f64> {
        let d = params.dim();
        let mut out = vec![0.0; params.token_table.data.len()];
        for (&r, g) in &self.token_rows {
            out[r * d..(r + 1) * d].copy_from_slice(g);
        }
        for l in &self.layers {
            out.extend_from_slice(&l.data);
        }
        for b in &self.biases {
            out.extend_from_slice(b);
        }
        out
    }
}

/// Stable FNV-1a bucket of a symbol.
pub fn symbol_id(symbol: &str, vocab: usize) -> usize {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in symbol.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    (h % vocab as u64) as usize
}

/// Sparse normalized adjacency `Â` with self loops: for every node the
/// list of `(neighbour, 1/c)` with `c = √((deg u + 1)(deg v + 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl NormalizedAdjacency {
    pub fn new(graph: &CodeGraph) -> Self {
        let nbrs = graph.undirected_neighbors();
        let deg: Vec<f64> = nbrs.iter().map(|n| n.len() as f64).collect();
        let rows = nbrs
            .iter()
            .enumerate()
            .map(|(v, ns)| {
                std::iter::once(v)
                    .chain(ns.iter().copied())
                    .map(|u| (u, 1.0 / ((deg[u] + 1.0) * (deg[v] + 1.0)).sqrt()))
                    .collect()
            })
            .collect();
        NormalizedAdjacency { rows }
    }

    /// `Â · H`
    pub fn apply(&self, h: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(h.rows, h.cols);
        for (v, row) in self.rows.iter().enumerate() {
            let cols = out.cols;
            let dst = &mut out.data[v * cols..(v + 1) * cols];
            for &(u, c) in row {
                axpy(dst, c, h.row(u));
            }
        }
        out
    }
}

/// Encoder-ready input, with every symbol already mapped to a table row.
#[derive(Debug, Clone, PartialEq)]
pub enum EncoderInput {
    Tokens(Vec<usize>),
    /// One symbol list per context: left token, path kinds, right token.
    Paths(Vec<Vec<usize>>),
    Graph { labels: Vec<usize>, adjacency: NormalizedAdjacency },
}

impl EncoderInput {
    pub fn kind(&self) -> EncoderKind {
        match self {
            EncoderInput::Tokens(_) => EncoderKind::Bow,
            EncoderInput::Paths(_) => EncoderKind::Paths,
            EncoderInput::Graph { .. } => EncoderKind::Gcn,
        }
    }

    /// Comment tokens are left out.
    pub fn from_tokens(tokens: &[Token], vocab: usize) -> Self {
        EncoderInput::Tokens(
            tokens.iter().filter(|t| t.kind != TokenKind::Comment).map(|t| symbol_id(&t.text, vocab)).collect(),
        )
    }

    pub fn from_paths(contexts: &[PathContext], vocab: usize) -> Self {
        EncoderInput::Paths(
            contexts
                .iter()
                .map(|c| {
                    std::iter::once(c.left_token.as_str())
                        .chain(c.path.iter().map(String::as_str))
                        .chain(std::iter::once(c.right_token.as_str()))
                        .map(|s| symbol_id(s, vocab))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn from_graph(graph: &CodeGraph, vocab: usize) -> Self {
        EncoderInput::Graph {
            labels: graph.labels.iter().map(|l| symbol_id(l, vocab)).collect(),
            adjacency: NormalizedAdjacency::new(graph),
        }
    }
}
