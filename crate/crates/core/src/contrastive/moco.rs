//! Momentum key encoder and FIFO queue of past projections.

use std::collections::VecDeque;

use super::{multi_positive_term, ContrastiveError, ProjectionHead};
use crate::encode::{axpy, norm, EncoderParams};

pub const DEFAULT_MOMENTUM: f64 = 0.999;

#[derive(Debug, Clone, PartialEq)]
pub struct QueueEntry {
    /// Unit-normalized projection.
    pub vector: Vec<f64>,
    pub group: usize,
}

#[derive(Debug, Clone)]
pub struct MocoState {
    pub key_encoder: EncoderParams,
    pub key_head: ProjectionHead,
    pub queue: VecDeque<QueueEntry>,
    pub capacity: usize,
    pub momentum: f64,
}

impl MocoState {
    /// Key side starts as a copy of the query side.
    pub fn new(encoder: &EncoderParams, head: &ProjectionHead, capacity: usize, momentum: f64) -> Result<Self, ContrastiveError> {
        if !(0.0..1.0).contains(&momentum) {
            return Err(ContrastiveError::InvalidMomentum(momentum.to_string()));
        }
        Ok(MocoState { key_encoder: encoder.clone(), key_head: head.clone(), queue: VecDeque::new(), capacity, momentum })
    }

    /// Appends entries and drops the oldest beyond capacity.
    pub fn enqueue(&mut self, vectors: &[Vec<f64>], groups: &[usize]) {
        for (v, &group) in vectors.iter().zip(groups) {
            let n = norm(v);
            let vector = if n > 0.0 { v.iter().map(|x| x / n).collect() } else { v.clone() };
            self.queue.push_back(QueueEntry { vector, group });
        }
        while self.queue.len() > self.capacity {
            self.queue.pop_front();
        }
    }
}

fn mismatch(expected: usize, found: usize) -> ContrastiveError {
    ContrastiveError::ShapeMismatch { expected, found }
}

/// `ξ ← m·ξ + (1 − m)·θ` for every key-side scalar.
pub fn moco_momentum_update(state: &mut MocoState, encoder: &EncoderParams, head: &ProjectionHead) -> Result<(), ContrastiveError> {
    let key = &state.key_encoder;
    if key.token_table.data.len() != encoder.token_table.data.len() {
        return Err(mismatch(key.token_table.data.len(), encoder.token_table.data.len()));
    }
    if key.layers.len() != encoder.layers.len() {
        return Err(mismatch(key.layers.len(), encoder.layers.len()));
    }
    for (a, b) in key.layers.iter().zip(&encoder.layers) {
        if a.data.len() != b.data.len() {
            return Err(mismatch(a.data.len(), b.data.len()));
        }
    }
    if key.biases.iter().map(Vec::len).ne(encoder.biases.iter().map(Vec::len)) {
        return Err(mismatch(key.biases.len(), encoder.biases.len()));
    }
    if state.key_head.dim() != head.dim() {
        return Err(mismatch(state.key_head.dim(), head.dim()));
    }
    let m = state.momentum;
    let blend = |xi: &mut f64, theta: f64| *xi = m * *xi + (1.0 - m) * theta;
    let key = &mut state.key_encoder;
    key.token_table.data.iter_mut().zip(&encoder.token_table.data).for_each(|(x, t)| blend(x, *t));
    for (a, b) in key.layers.iter_mut().zip(&encoder.layers) {
        a.data.iter_mut().zip(&b.data).for_each(|(x, t)| blend(x, *t));
    }
    for (a, b) in key.biases.iter_mut().zip(&encoder.biases) {
        a.iter_mut().zip(b).for_each(|(x, t)| blend(x, *t));
    }
    key.version += 1;
    state.key_head.scalars_mut().zip(head.scalars()).for_each(|(x, t)| blend(x, *t));
    Ok(())
}

/// Loss of one MoCo step and its gradient with respect to the queries.
#[derive(Debug, Clone, PartialEq)]
pub struct MocoStep {
    pub loss: f64,
    pub grad_q: Vec<Vec<f64>>,
}

/// UniMoCo step: each query `q'_j` is contrasted with every in-batch key and
/// every queued vector; keys and queued vectors of the anchor's group are
/// positives. The queries are enqueued afterwards.
pub fn moco_step(state: &mut MocoState, q: &[Vec<f64>], k: &[Vec<f64>], groups: &[usize], tau: f64) -> Result<MocoStep, ContrastiveError> {
    let b = q.len();
    if k.len() != b {
        return Err(mismatch(b, k.len()));
    }
    if groups.len() != b {
        return Err(mismatch(b, groups.len()));
    }
    let dim = q.first().map_or(0, Vec::len);
    let mut out = MocoStep { loss: 0.0, grad_q: vec![vec![0.0; dim]; b] };
    if b == 0 {
        return Ok(out);
    }
    let mut candidates: Vec<&[f64]> = k.iter().map(Vec::as_slice).collect();
    candidates.extend(state.queue.iter().map(|e| e.vector.as_slice()));
    let candidate_groups: Vec<usize> = groups.iter().copied().chain(state.queue.iter().map(|e| e.group)).collect();
    let scale = 1.0 / b as f64;
    for j in 0..b {
        let positive: Vec<bool> =
            candidate_groups.iter().enumerate().map(|(i, &g)| i == j || (g == groups[j])).collect();
        let term = multi_positive_term(&q[j], &candidates, &positive, tau)?;
        out.loss += term.loss * scale;
        axpy(&mut out.grad_q[j], scale, &term.grad_anchor);
    }
    state.enqueue(q, groups);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::simclr_batch_loss;
    use super::*;
    use crate::encode::{EncoderConfig, EncoderKind};

    fn params(seed: u64) -> EncoderParams {
        EncoderParams::init(&EncoderConfig { kind: EncoderKind::Bow, dim: 2, vocab: 4, depth: 1 }, seed)
    }

    #[test]
    fn rejects_bad_momentum() {
        let p = params(0);
        let h = ProjectionHead::init(2, 0);
        assert!(MocoState::new(&p, &h, 4, 1.0).is_err());
        assert!(MocoState::new(&p, &h, 4, -0.1).is_err());
    }

    #[test]
    fn zero_momentum_copies() {
        let (p, q) = (params(0), params(1));
        let (h, g) = (ProjectionHead::init(2, 0), ProjectionHead::init(2, 1));
        let mut s = MocoState::new(&p, &h, 4, 0.0).unwrap();
        moco_momentum_update(&mut s, &q, &g).unwrap();
        assert_eq!(s.key_encoder.flat(), q.flat());
        assert_eq!(s.key_head, g);
    }

    #[test]
    fn one_step_by_hand() {
        let mut zero = params(0);
        zero.token_table.data.iter_mut().for_each(|v| *v = 0.0);
        let mut one = zero.clone();
        one.token_table.data.iter_mut().for_each(|v| *v = 1.0);
        let h = ProjectionHead::zeros(2);
        let mut s = MocoState::new(&zero, &h, 4, 0.999).unwrap();
        moco_momentum_update(&mut s, &one, &h).unwrap();
        assert!(s.key_encoder.token_table.data.iter().all(|v| (v - 0.001).abs() < 1e-15));
    }

    #[test]
    fn shape_mismatch() {
        let p = params(0);
        let other = EncoderParams::init(&EncoderConfig { kind: EncoderKind::Bow, dim: 3, vocab: 4, depth: 1 }, 0);
        let mut s = MocoState::new(&p, &ProjectionHead::init(2, 0), 4, 0.5).unwrap();
        assert!(matches!(moco_momentum_update(&mut s, &other, &ProjectionHead::init(2, 0)), Err(ContrastiveError::ShapeMismatch { .. })));
    }

    #[test]
    fn empty_queue_distinct_groups_matches_in_batch_form() {
        let q = vec![vec![1.0, 0.2], vec![0.1, 1.0], vec![-0.4, 0.3]];
        let k = vec![vec![0.9, 0.1], vec![0.3, 0.8], vec![-0.5, 0.2]];
        let mut s = MocoState::new(&params(0), &ProjectionHead::init(2, 0), 10, 0.9).unwrap();
        let got = moco_step(&mut s, &q, &k, &[0, 1, 2], 0.07).unwrap().loss;
        let mut want = 0.0;
        for j in 0..3 {
            let negs: Vec<Vec<f64>> = (0..3).filter(|&i| i != j).map(|i| k[i].clone()).collect();
            want += super::super::info_nce(&q[j], &k[j], &negs, 0.07).unwrap() / 3.0;
        }
        assert!((got - want).abs() < 1e-12);
        assert_eq!(s.queue.len(), 3);
        // sanity: the SimCLR form uses queries as negatives instead
        assert!(simclr_batch_loss(&q, &k, 0.07).is_ok());
    }

    #[test]
    fn queue_fills_then_stays() {
        let mut s = MocoState::new(&params(0), &ProjectionHead::init(2, 0), 5, 0.9).unwrap();
        let mut pushed = Vec::new();
        for step in 0..6 {
            let q = vec![vec![1.0, step as f64], vec![step as f64, 1.0]];
            pushed.extend(q.iter().cloned());
            moco_step(&mut s, &q, &q, &[step, step + 100], 0.1).unwrap();
            let expect = ((step + 1) * 2).min(5);
            assert_eq!(s.queue.len(), expect);
        }
        let tail: Vec<Vec<f64>> =
            pushed[pushed.len() - 5..].iter().map(|v| v.iter().map(|x| x / norm(v)).collect()).collect();
        assert_eq!(s.queue.iter().map(|e| e.vector.clone()).collect::<Vec<_>>(), tail);
    }

    #[test]
    fn two_slot_queue_oracle() {
        let mut s = MocoState::new(&params(0), &ProjectionHead::init(2, 0), 2, 0.9).unwrap();
        s.enqueue(&[vec![0.0, 1.0], vec![1.0, 1.0]], &[7, 3]);
        let q = vec![vec![1.0, 0.0]];
        let k = vec![vec![2.0, 1.0]];
        let got = moco_step(&mut s, &q, &k, &[3], 1.0).unwrap().loss;
        let c_k = 2.0 / 5f64.sqrt();
        let c_q1 = 0f64;
        let c_q2 = 1.0 / 2f64.sqrt();
        let denom = c_k.exp() + c_q1.exp() + c_q2.exp();
        let want = -0.5 * ((c_k.exp() / denom).ln() + (c_q2.exp() / denom).ln());
        assert!((got - want).abs() < 1e-14);
        assert_eq!(s.queue.len(), 2);
        assert_eq!(s.queue.back().unwrap().group, 3);
    }
}
