use super::matrix::{axpy, sigmoid, Matrix};
use super::{EncodeError, Embedding, EncoderInput, EncoderParams, Gradients, NormalizedAdjacency};
use crate::graph::{CodeGraph, PathContext};
use crate::lang::Token;

/// Intermediate values of one forward pass, consumed by [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardRecord {
    version: u64,
    trace: Trace,
}

#[derive(Debug, Clone)]
enum Trace {
    Bow { ids: Vec<usize>, x: Vec<f64>, h: Vec<f64> },
    Paths { contexts: Vec<Vec<usize>>, means: Vec<Vec<f64>>, z: Vec<Vec<f64>>, pooled: Vec<f64> },
    Gcn { labels: Vec<usize>, adjacency: NormalizedAdjacency, p: Vec<Matrix>, s: Vec<Matrix>, pooled: Vec<f64> },
}

fn mean_rows(table: &Matrix, ids: &[usize]) -> Vec<f64> {
    let mut x = vec![0.0; table.cols];
    for &i in ids {
        axpy(&mut x, 1.0, table.row(i));
    }
    let n = ids.len() as f64;
    x.iter_mut().for_each(|v| *v /= n);
    x
}

fn affine(w: &Matrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut y = w.matvec(x);
    axpy(&mut y, 1.0, b);
    y
}

fn check_ids(params: &EncoderParams, ids: impl IntoIterator<Item = usize>) -> Result<(), EncodeError> {
    let vocab = params.vocab();
    match ids.into_iter().find(|&i| i >= vocab) {
        Some(i) => Err(EncodeError::DimensionMismatch { expected: vocab, found: i + 1 }),
        None => Ok(()),
    }
}

/// Runs the encoder and keeps what the backward pass needs.
pub fn forward(params: &EncoderParams, input: &EncoderInput) -> Result<(Embedding, ForwardRecord), EncodeError> {
    if params.kind != input.kind() {
        return Err(EncodeError::WrongInput { params: params.kind, input: input.kind() });
    }
    let (out, trace) = match input {
        EncoderInput::Tokens(ids) => {
            if ids.is_empty() {
                return Err(EncodeError::EmptyInput);
            }
            check_ids(params, ids.iter().copied())?;
            let x = mean_rows(&params.token_table, ids);
            let h: Vec<f64> = affine(&params.layers[0], &x, &params.biases[0]).into_iter().map(f64::tanh).collect();
            let y = affine(&params.layers[1], &h, &params.biases[1]);
            (y, Trace::Bow { ids: ids.clone(), x, h })
        }
        EncoderInput::Paths(contexts) => {
            if contexts.is_empty() || contexts.iter().any(Vec::is_empty) {
                return Err(EncodeError::EmptyInput);
            }
            check_ids(params, contexts.iter().flatten().copied())?;
            let d = params.dim();
            let means: Vec<Vec<f64>> = contexts.iter().map(|c| mean_rows(&params.token_table, c)).collect();
            let z: Vec<Vec<f64>> = means
                .iter()
                .map(|m| affine(&params.layers[0], m, &params.biases[0]).into_iter().map(f64::tanh).collect())
                .collect();
            let mut pooled = vec![0.0; d];
            for zc in &z {
                axpy(&mut pooled, 1.0 / z.len() as f64, zc);
            }
            // mean of per-context affine maps equals the affine map of the mean
            let y = affine(&params.layers[1], &pooled, &params.biases[1]);
            (y, Trace::Paths { contexts: contexts.clone(), means, z, pooled })
        }
        EncoderInput::Graph { labels, adjacency } => {
            if labels.is_empty() {
                return Err(EncodeError::EmptyInput);
            }
            check_ids(params, labels.iter().copied())?;
            let depth = params.layers.len() - 1;
            let mut h = Matrix::from_rows(&labels.iter().map(|&l| params.token_table.row(l).to_vec()).collect::<Vec<_>>());
            let (mut ps, mut ss) = (Vec::with_capacity(depth), Vec::with_capacity(depth));
            for w in &params.layers[..depth] {
                let p = adjacency.apply(&h);
                let s = sigmoid_product(&p, w);
                h.add_scaled(1.0, &s);
                ps.push(p);
                ss.push(s);
            }
            let pooled = mean_rows(&h, &(0..h.rows).collect::<Vec<_>>());
            let y = affine(&params.layers[depth], &pooled, &params.biases[0]);
            (y, Trace::Gcn { labels: labels.clone(), adjacency: adjacency.clone(), p: ps, s: ss, pooled })
        }
    };
    Ok((out, ForwardRecord { version: params.version, trace }))
}

/// `σ(P·Wᵀ)` row by row.
fn sigmoid_product(p: &Matrix, w: &Matrix) -> Matrix {
    let mut s = Matrix::zeros(p.rows, w.rows);
    for v in 0..p.rows {
        let row = w.matvec(p.row(v));
        for (dst, a) in s.row_mut(v).iter_mut().zip(row) {
            *dst = sigmoid(a);
        }
    }
    s
}

pub fn encode(params: &EncoderParams, input: &EncoderInput) -> Result<Embedding, EncodeError> {
    forward(params, input).map(|(y, _)| y)
}

/// Bag-of-tokens embedding; comment tokens are ignored.
pub fn encode_bow(tokens: &[Token], params: &EncoderParams) -> Result<Embedding, EncodeError> {
    encode(params, &EncoderInput::from_tokens(tokens, params.vocab()))
}

pub fn encode_paths(contexts: &[PathContext], params: &EncoderParams) -> Result<Embedding, EncodeError> {
    encode(params, &EncoderInput::from_paths(contexts, params.vocab()))
}

pub fn encode_graph(graph: &CodeGraph, params: &EncoderParams) -> Result<Embedding, EncodeError> {
    encode(params, &EncoderInput::from_graph(graph, params.vocab()))
}

/// One graph convolution without the residual term:
/// `h'_v = σ(Σ_{u ∈ N(v) ∪ {v}} W·h_u / √((deg u + 1)(deg v + 1)))`.
pub fn gcn_layer(h: &Matrix, graph: &CodeGraph, w: &Matrix) -> Result<Matrix, EncodeError> {
    if h.rows != graph.node_count() {
        return Err(EncodeError::DimensionMismatch { expected: graph.node_count(), found: h.rows });
    }
    if w.cols != h.cols {
        return Err(EncodeError::DimensionMismatch { expected: h.cols, found: w.cols });
    }
    Ok(sigmoid_product(&NormalizedAdjacency::new(graph).apply(h), w))
}

/// Gradient of `⟨upstream, forward(params, input)⟩` with respect to every
/// parameter.
pub fn backward(params: &EncoderParams, record: &ForwardRecord, upstream: &[f64]) -> Result<Gradients, EncodeError> {
    if record.version != params.version {
        return Err(EncodeError::StaleRecord { record: record.version, params: params.version });
    }
    let d = params.dim();
    if upstream.len() != d {
        return Err(EncodeError::DimensionMismatch { expected: d, found: upstream.len() });
    }
    let mut g = Gradients::zeros_like(params);
    match &record.trace {
        Trace::Bow { ids, x, h } => {
            g.layers[1].add_outer(upstream, h);
            g.biases[1].copy_from_slice(upstream);
            let gh = params.layers[1].t_matvec(upstream);
            let ga: Vec<f64> = gh.iter().zip(h).map(|(g, h)| g * (1.0 - h * h)).collect();
            g.layers[0].add_outer(&ga, x);
            g.biases[0].copy_from_slice(&ga);
            let gx = params.layers[0].t_matvec(&ga);
            let share = 1.0 / ids.len() as f64;
            for &i in ids {
                axpy(g.token_row_mut(i, d), share, &gx);
            }
        }
        Trace::Paths { contexts, means, z, pooled } => {
            g.layers[1].add_outer(upstream, pooled);
            g.biases[1].copy_from_slice(upstream);
            let gp = params.layers[1].t_matvec(upstream);
            let per_context = 1.0 / contexts.len() as f64;
            for ((ctx, m), zc) in contexts.iter().zip(means).zip(z) {
                let ga: Vec<f64> = gp.iter().zip(zc).map(|(g, z)| g * per_context * (1.0 - z * z)).collect();
                g.layers[0].add_outer(&ga, m);
                axpy(&mut g.biases[0], 1.0, &ga);
                let gm = params.layers[0].t_matvec(&ga);
                let share = 1.0 / ctx.len() as f64;
                for &i in ctx {
                    axpy(g.token_row_mut(i, d), share, &gm);
                }
            }
        }
        Trace::Gcn { labels, adjacency, p, s, pooled } => {
            let depth = params.layers.len() - 1;
            let n = labels.len();
            g.layers[depth].add_outer(upstream, pooled);
            g.biases[0].copy_from_slice(upstream);
            let gm = params.layers[depth].t_matvec(upstream);
            // gradient with respect to H_k, starting from the mean pooling
            let mut gh = Matrix::zeros(n, d);
            for v in 0..n {
                axpy(gh.row_mut(v), 1.0 / n as f64, &gm);
            }
            for k in (0..depth).rev() {
                let (pk, sk, wk) = (&p[k], &s[k], &params.layers[k]);
                let mut ga = Matrix::zeros(n, d);
                for (dst, (gv, sv)) in ga.data.iter_mut().zip(gh.data.iter().zip(&sk.data)) {
                    *dst = gv * sv * (1.0 - sv);
                }
                let mut gp = Matrix::zeros(n, d);
                for v in 0..n {
                    g.layers[k].add_outer(ga.row(v), pk.row(v));
                    let back = wk.t_matvec(ga.row(v));
                    gp.row_mut(v).copy_from_slice(&back);
                }
                // Â is symmetric, so Âᵀ·G equals Â·G
                gh.add_scaled(1.0, &adjacency.apply(&gp));
            }
            for (v, &l) in labels.iter().enumerate() {
                axpy(g.token_row_mut(l, d), 1.0, gh.row(v));
            }
        }
    }
    Ok(g)
}
