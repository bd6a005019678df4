//! Projection head `g`, used only while training.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ContrastiveError;
use crate::encode::{axpy, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    /// No nonlinearity; lets tests check the affine path alone.
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output.
    fn slope(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// `W2·act(W1·x + b1) + b2` with square weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionHead {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadGradients {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct HeadRecord {
    input: Vec<f64>,
    hidden: Vec<f64>,
}

impl ProjectionHead {
    pub fn init(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (dim as f64).sqrt();
        let mut fill = |n: usize| (0..n).map(|_| rng.gen_range(-bound..=bound)).collect::<Vec<f64>>();
        ProjectionHead {
            w1: Matrix { rows: dim, cols: dim, data: fill(dim * dim) },
            b1: vec![0.0; dim],
            w2: Matrix { rows: dim, cols: dim, data: fill(dim * dim) },
            b2: vec![0.0; dim],
            activation: Activation::Tanh,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        ProjectionHead {
            w1: Matrix::zeros(dim, dim),
            b1: vec![0.0; dim],
            w2: Matrix::zeros(dim, dim),
            b2: vec![0.0; dim],
            activation: Activation::Tanh,
        }
    }

    pub fn dim(&self) -> usize {
        self.b1.len()
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, HeadRecord), ContrastiveError> {
        if x.len() != self.w1.cols {
            return Err(ContrastiveError::ShapeMismatch { expected: self.w1.cols, found: x.len() });
        }
        let mut hidden = self.w1.matvec(x);
        axpy(&mut hidden, 1.0, &self.b1);
        hidden.iter_mut().for_each(|v| *v = self.activation.apply(*v));
        let mut out = self.w2.matvec(&hidden);
        axpy(&mut out, 1.0, &self.b2);
        Ok((out, HeadRecord { input: x.to_vec(), hidden }))
    }

    /// Parameter gradients and the gradient with respect to the input.
    pub fn backward(&self, record: &HeadRecord, upstream: &[f64]) -> (HeadGradients, Vec<f64>) {
        let d = self.dim();
        let mut g = HeadGradients { w1: Matrix::zeros(d, d), b1: vec![0.0; d], w2: Matrix::zeros(d, d), b2: upstream.to_vec() };
        g.w2.add_outer(upstream, &record.hidden);
        let gh = self.w2.t_matvec(upstream);
        let ga: Vec<f64> = gh.iter().zip(&record.hidden).map(|(g, h)| g * self.activation.slope(*h)).collect();
        g.w1.add_outer(&ga, &record.input);
        g.b1 = ga.clone();
        let gx = self.w1.t_matvec(&ga);
        (g, gx)
    }

    pub fn apply_gradients(&mut self, g: &HeadGradients, lr: f64) {
        self.w1.add_scaled(-lr, &g.w1);
        axpy(&mut self.b1, -lr, &g.b1);
        self.w2.add_scaled(-lr, &g.w2);
        axpy(&mut self.b2, -lr, &g.b2);
    }

    pub(crate) fn scalars_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1.data.iter_mut().chain(self.b1.iter_mut()).chain(self.w2.data.iter_mut()).chain(self.b2.iter_mut())
    }

    pub(crate) fn scalars(&self) -> impl Iterator<Item = &f64> {
        self.w1.data.iter().chain(self.b1.iter()).chain(self.w2.data.iter()).chain(self.b2.iter())
    }

    pub fn is_finite(&self) -> bool {
        self.scalars().all(|v| v.is_finite())
    }
}

impl HeadGradients {
    pub fn zeros(dim: usize) -> Self {
        HeadGradients { w1: Matrix::zeros(dim, dim), b1: vec![0.0; dim], w2: Matrix::zeros(dim, dim), b2: vec![0.0; dim] }
    }

    pub fn add_assign(&mut self, o: &HeadGradients) {
        self.w1.add_scaled(1.0, &o.w1);
        axpy(&mut self.b1, 1.0, &o.b1);
        self.w2.add_scaled(1.0, &o.w2);
        axpy(&mut self.b2, 1.0, &o.b2);
    }
}

pub fn project(embedding: &[f64], head: &ProjectionHead) -> Result<Vec<f64>, ContrastiveError> {
    head.forward(embedding).map(|(y, _)| y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_head_gives_zero() {
        assert_eq!(project(&[1.0, -2.0, 3.0], &ProjectionHead::zeros(3)).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn identity_head_is_identity() {
        let mut h = ProjectionHead::zeros(3);
        h.w1 = Matrix::identity(3);
        h.w2 = Matrix::identity(3);
        h.activation = Activation::Identity;
        assert_eq!(project(&[1.0, -2.0, 3.0], &h).unwrap(), vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn two_dim_by_hand() {
        let h = ProjectionHead {
            w1: Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 2.0]]),
            b1: vec![0.0, -1.0],
            w2: Matrix::from_rows(&[vec![2.0, 0.0], vec![1.0, -1.0]]),
            b2: vec![0.5, 0.0],
            activation: Activation::Tanh,
        };
        // hidden = tanh(1, 0) ; out = (2·tanh1 + 0.5, tanh1)
        let y = project(&[0.5, 0.5], &h).unwrap();
        let t = 1f64.tanh();
        assert!((y[0] - (2.0 * t + 0.5)).abs() < 1e-15 && (y[1] - t).abs() < 1e-15);
        assert!(project(&[1.0], &h).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = ProjectionHead::init(3, 4);
        let x = [0.3, -0.7, 0.2];
        let u = [1.0, -0.5, 0.25];
        let (_, rec) = h.forward(&x).unwrap();
        let (g, gx) = h.backward(&rec, &u);
        let f = |h: &ProjectionHead, x: &[f64]| crate::encode::dot(&project(x, h).unwrap(), &u);
        let eps = 1e-6;
        let analytic: Vec<f64> = g.w1.data.iter().chain(&g.b1).chain(&g.w2.data).chain(&g.b2).copied().collect();
        for (i, a) in analytic.iter().enumerate() {
            let (mut p, mut m) = (h.clone(), h.clone());
            *p.scalars_mut().nth(i).unwrap() += eps;
            *m.scalars_mut().nth(i).unwrap() -= eps;
            let num = (f(&p, &x) - f(&m, &x)) / (2.0 * eps);
            assert!((num - a).abs() < 1e-8, "{i}: {num} vs {a}");
        }
        for d in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[d] += eps;
            xm[d] -= eps;
            let num = (f(&h, &xp) - f(&h, &xm)) / (2.0 * eps);
            assert!((num - gx[d]).abs() < 1e-8);
        }
    }
}
