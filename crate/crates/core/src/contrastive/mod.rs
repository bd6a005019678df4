//! Contrastive objectives: InfoNCE with in-batch negatives (SimCLR) and its
//! multi-positive form (SupCon), momentum encoders with a queue (MoCo and
//! UniMoCo) and prototype assignment (SwAV).
//!
//! Every loss returns its gradient with respect to the vectors it was given,
//! so callers can continue backpropagation into a projection head and an
//! encoder. Similarity is cosine everywhere.

mod head;
mod moco;
mod swav;

use thiserror::Error;

use crate::encode::{dot, norm};

pub use head::{project, Activation, HeadGradients, HeadRecord, ProjectionHead};
pub use moco::{moco_momentum_update, moco_step, MocoState, MocoStep, QueueEntry, DEFAULT_MOMENTUM};
pub use swav::{swav_assign, swav_loss, swav_step, SwavState, SwavStep, BALANCING_ITERATIONS};

pub const SIMCLR_TEMPERATURE: f64 = 0.1;
pub const MOCO_TEMPERATURE: f64 = 0.07;
pub const SWAV_TEMPERATURE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContrastiveError {
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("batch of {0} is too small, at least 2 are needed")]
    BatchTooSmall(usize),
    #[error("anchor has no positive candidate")]
    NoPositives,
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("temperature must be positive, got {0}")]
    InvalidTemperature(String),
    #[error("momentum must lie in [0, 1), got {0}")]
    InvalidMomentum(String),
    #[error("no negative candidates")]
    NoNegatives,
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, ContrastiveError> {
    if a.len() != b.len() {
        return Err(ContrastiveError::ShapeMismatch { expected: a.len(), found: b.len() });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(ContrastiveError::ZeroVector);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Cosine and its gradients with respect to both arguments.
pub(crate) fn cosine_with_grad(a: &[f64], b: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>), ContrastiveError> {
    if a.len() != b.len() {
        return Err(ContrastiveError::ShapeMismatch { expected: a.len(), found: b.len() });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(ContrastiveError::ZeroVector);
    }
    let c = dot(a, b) / (na * nb);
    let ga = a.iter().zip(b).map(|(x, y)| y / (na * nb) - c * x / (na * na)).collect();
    let gb = a.iter().zip(b).map(|(x, y)| x / (na * nb) - c * y / (nb * nb)).collect();
    Ok((c, ga, gb))
}

pub(crate) fn check_temperature(tau: f64) -> Result<(), ContrastiveError> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(ContrastiveError::InvalidTemperature(tau.to_string()))
    }
}

/// `max + ln Σ exp(x − max)`
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// One anchor's multi-positive term and its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastiveTerm {
    pub loss: f64,
    pub grad_anchor: Vec<f64>,
    pub grad_candidates: Vec<Vec<f64>>,
}

/// `−(1/|P|) Σ_{p∈P} log( exp(s_p/τ) / Σ_a exp(s_a/τ) )` over `candidates`,
/// where `positive` marks `P` and `s` is cosine similarity to `anchor`.
pub fn multi_positive_term(
    anchor: &[f64],
    candidates: &[&[f64]],
    positive: &[bool],
    tau: f64,
) -> Result<ContrastiveTerm, ContrastiveError> {
    check_temperature(tau)?;
    let n_pos = positive.iter().filter(|p| **p).count();
    if n_pos == 0 {
        return Err(ContrastiveError::NoPositives);
    }
    let mut logits = Vec::with_capacity(candidates.len());
    let mut d_anchor = Vec::with_capacity(candidates.len());
    let mut d_cand = Vec::with_capacity(candidates.len());
    for c in candidates {
        let (s, ga, gc) = cosine_with_grad(anchor, c)?;
        logits.push(s / tau);
        d_anchor.push(ga);
        d_cand.push(gc);
    }
    let lse = log_sum_exp(&logits);
    let pos_mean = logits.iter().zip(positive).filter(|(_, p)| **p).map(|(l, _)| *l).sum::<f64>() / n_pos as f64;
    let loss = lse - pos_mean;

    let mut grad_anchor = vec![0.0; anchor.len()];
    let mut grad_candidates = Vec::with_capacity(candidates.len());
    for (k, (&logit, &is_pos)) in logits.iter().zip(positive).enumerate() {
        let target = if is_pos { 1.0 / n_pos as f64 } else { 0.0 };
        let w = ((logit - lse).exp() - target) / tau;
        crate::encode::axpy(&mut grad_anchor, w, &d_anchor[k]);
        grad_candidates.push(d_cand[k].iter().map(|g| g * w).collect());
    }
    Ok(ContrastiveTerm { loss, grad_anchor, grad_candidates })
}

/// InfoNCE with one positive.
pub fn info_nce(q: &[f64], k_pos: &[f64], negatives: &[Vec<f64>], tau: f64) -> Result<f64, ContrastiveError> {
    if negatives.is_empty() {
        return Err(ContrastiveError::NoNegatives);
    }
    let mut candidates: Vec<&[f64]> = vec![k_pos];
    candidates.extend(negatives.iter().map(Vec::as_slice));
    let mut positive = vec![false; candidates.len()];
    positive[0] = true;
    Ok(multi_positive_term(q, &candidates, &positive, tau)?.loss)
}

/// Batch loss with gradients for every query and key.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchLoss {
    pub loss: f64,
    pub grad_q: Vec<Vec<f64>>,
    pub grad_k: Vec<Vec<f64>>,
}

/// SimCLR: anchor `q'_j`, positive `k'_j`, negatives every other `q'_i`.
pub fn simclr_batch_loss(q: &[Vec<f64>], k: &[Vec<f64>], tau: f64) -> Result<BatchLoss, ContrastiveError> {
    batch_loss(q, k, None, tau)
}

/// SupCon: like [`simclr_batch_loss`] but every `q'_i` of the anchor's group
/// also counts as a positive.
pub fn supcon_batch_loss(q: &[Vec<f64>], k: &[Vec<f64>], groups: &[usize], tau: f64) -> Result<BatchLoss, ContrastiveError> {
    if groups.len() != q.len() {
        return Err(ContrastiveError::ShapeMismatch { expected: q.len(), found: groups.len() });
    }
    batch_loss(q, k, Some(groups), tau)
}

fn batch_loss(q: &[Vec<f64>], k: &[Vec<f64>], groups: Option<&[usize]>, tau: f64) -> Result<BatchLoss, ContrastiveError> {
    let b = q.len();
    if b < 2 {
        return Err(ContrastiveError::BatchTooSmall(b));
    }
    if k.len() != b {
        return Err(ContrastiveError::ShapeMismatch { expected: b, found: k.len() });
    }
    let dim = q[0].len();
    let mut out = BatchLoss { loss: 0.0, grad_q: vec![vec![0.0; dim]; b], grad_k: vec![vec![0.0; dim]; b] };
    let scale = 1.0 / b as f64;
    for j in 0..b {
        // candidate order: own key, then the other queries in batch order
        let mut candidates: Vec<&[f64]> = vec![&k[j]];
        let mut owners = vec![None];
        let mut positive = vec![true];
        for i in (0..b).filter(|&i| i != j) {
            candidates.push(&q[i]);
            owners.push(Some(i));
            positive.push(groups.is_some_and(|g| g[i] == g[j]));
        }
        let term = multi_positive_term(&q[j], &candidates, &positive, tau)?;
        out.loss += term.loss * scale;
        crate::encode::axpy(&mut out.grad_q[j], scale, &term.grad_anchor);
        for (owner, g) in owners.into_iter().zip(&term.grad_candidates) {
            match owner {
                None => crate::encode::axpy(&mut out.grad_k[j], scale, g),
                Some(i) => crate::encode::axpy(&mut out.grad_q[i], scale, g),
            }
        }
    }
    Ok(out)
}
