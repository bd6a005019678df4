//! Prototype assignment with swapped prediction; no negatives involved.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_temperature, cosine_similarity, cosine_with_grad, log_sum_exp, ContrastiveError};
use crate::encode::{axpy, norm, Matrix};

pub const BALANCING_ITERATIONS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SwavState {
    /// One unit-length prototype per row.
    pub prototypes: Matrix,
    pub tau: f64,
}

impl SwavState {
    pub fn new(count: usize, dim: usize, tau: f64, seed: u64) -> Result<Self, ContrastiveError> {
        if count < 2 {
            return Err(ContrastiveError::ShapeMismatch { expected: 2, found: count });
        }
        check_temperature(tau)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..count * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut s = SwavState { prototypes: Matrix { rows: count, cols: dim, data }, tau };
        s.renormalize();
        Ok(s)
    }

    pub fn count(&self) -> usize {
        self.prototypes.rows
    }

    pub fn renormalize(&mut self) {
        for r in 0..self.prototypes.rows {
            let row = self.prototypes.row_mut(r);
            let n = norm(row);
            if n > 0.0 {
                row.iter_mut().for_each(|v| *v /= n);
            }
        }
    }

    /// Gradient step on the prototypes followed by renormalization.
    pub fn apply_gradients(&mut self, grad: &Matrix, lr: f64) {
        self.prototypes.add_scaled(-lr, grad);
        self.renormalize();
    }

    fn scores(&self, embeddings: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ContrastiveError> {
        embeddings
            .iter()
            .map(|e| (0..self.count()).map(|l| cosine_similarity(e, self.prototypes.row(l))).collect())
            .collect()
    }
}

fn softmax(xs: &[f64], tau: f64) -> Vec<f64> {
    let scaled: Vec<f64> = xs.iter().map(|x| x / tau).collect();
    let lse = log_sum_exp(&scaled);
    scaled.iter().map(|x| (x - lse).exp()).collect()
}

/// Soft codes: row softmax of `cos(e, c_l)/τ`, then alternating column and
/// row normalization so every prototype receives an equal share of the
/// batch. A batch of one is left at the plain softmax, since balancing a
/// single row would force it to uniform.
pub fn swav_assign(embeddings: &[Vec<f64>], state: &SwavState) -> Result<Vec<Vec<f64>>, ContrastiveError> {
    if embeddings.is_empty() {
        return Err(ContrastiveError::BatchTooSmall(0));
    }
    let scores = state.scores(embeddings)?;
    Ok(balance(scores.iter().map(|s| softmax(s, state.tau)).collect()))
}

fn balance(mut q: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let b = q.len();
    if b < 2 {
        return q;
    }
    let l = q[0].len();
    let col_target = b as f64 / l as f64;
    for _ in 0..BALANCING_ITERATIONS {
        for c in 0..l {
            let sum: f64 = q.iter().map(|r| r[c]).sum();
            if sum > 0.0 {
                q.iter_mut().for_each(|r| r[c] *= col_target / sum);
            }
        }
        for r in &mut q {
            let sum: f64 = r.iter().sum();
            if sum > 0.0 {
                r.iter_mut().for_each(|v| *v /= sum);
            }
        }
    }
    q
}

/// Swapped prediction: cross-entropy of `softmax(scores_q/τ)` against
/// `z_k` plus that of `softmax(scores_k/τ)` against `z_q`, averaged over the
/// batch. Scores are raw cosines to the prototypes.
pub fn swav_loss(
    z_q: &[Vec<f64>],
    z_k: &[Vec<f64>],
    scores_q: &[Vec<f64>],
    scores_k: &[Vec<f64>],
    tau: f64,
) -> Result<f64, ContrastiveError> {
    check_temperature(tau)?;
    let b = z_q.len();
    for m in [z_k, scores_q, scores_k] {
        if m.len() != b {
            return Err(ContrastiveError::ShapeMismatch { expected: b, found: m.len() });
        }
    }
    if b == 0 {
        return Err(ContrastiveError::BatchTooSmall(0));
    }
    let mut total = 0.0;
    for i in 0..b {
        total += cross_entropy(&z_k[i], &scores_q[i], tau)? + cross_entropy(&z_q[i], &scores_k[i], tau)?;
    }
    Ok(total / b as f64)
}

fn cross_entropy(target: &[f64], scores: &[f64], tau: f64) -> Result<f64, ContrastiveError> {
    if target.len() != scores.len() {
        return Err(ContrastiveError::ShapeMismatch { expected: target.len(), found: scores.len() });
    }
    let scaled: Vec<f64> = scores.iter().map(|s| s / tau).collect();
    let lse = log_sum_exp(&scaled);
    Ok(target.iter().zip(&scaled).filter(|(t, _)| **t != 0.0).map(|(t, s)| -t * (s - lse)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwavStep {
    pub loss: f64,
    pub grad_q: Vec<Vec<f64>>,
    pub grad_k: Vec<Vec<f64>>,
    pub grad_prototypes: Matrix,
}

/// Full SwAV objective for two views of a batch, with gradients for both
/// views and the prototypes. Codes are treated as constants.
pub fn swav_step(state: &SwavState, q: &[Vec<f64>], k: &[Vec<f64>]) -> Result<SwavStep, ContrastiveError> {
    let b = q.len();
    if k.len() != b {
        return Err(ContrastiveError::ShapeMismatch { expected: b, found: k.len() });
    }
    let z_q = swav_assign(q, state)?;
    let z_k = swav_assign(k, state)?;
    let (l, d, tau) = (state.count(), state.prototypes.cols, state.tau);
    let mut step = SwavStep {
        loss: 0.0,
        grad_q: vec![vec![0.0; d]; b],
        grad_k: vec![vec![0.0; d]; b],
        grad_prototypes: Matrix::zeros(l, d),
    };
    let scale = 1.0 / b as f64;
    for (views, targets, grads) in [(q, &z_k, &mut step.grad_q), (k, &z_q, &mut step.grad_k)] {
        for i in 0..b {
            let mut scores = Vec::with_capacity(l);
            let mut d_view = Vec::with_capacity(l);
            let mut d_proto = Vec::with_capacity(l);
            for c in 0..l {
                let (s, gv, gp) = cosine_with_grad(&views[i], state.prototypes.row(c))?;
                scores.push(s);
                d_view.push(gv);
                d_proto.push(gp);
            }
            step.loss += cross_entropy(&targets[i], &scores, tau)? * scale;
            let p = softmax(&scores, tau);
            for c in 0..l {
                let w = (p[c] - targets[i][c]) / tau * scale;
                axpy(&mut grads[i], w, &d_view[c]);
                axpy(step.grad_prototypes.row_mut(c), w, &d_proto[c]);
            }
        }
    }
    Ok(step)
}
