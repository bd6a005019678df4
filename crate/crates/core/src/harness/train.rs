use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{make_batches, Batch, Corpus, HarnessError};
use crate::baselines::{similarity_matrix, Detector};
use crate::contrastive::{
    moco_momentum_update, moco_step, simclr_batch_loss, supcon_batch_loss, swav_step, HeadGradients, HeadRecord,
    MocoState, ProjectionHead, SwavState, DEFAULT_MOMENTUM, MOCO_TEMPERATURE, SIMCLR_TEMPERATURE, SWAV_TEMPERATURE,
};
use crate::encode::{
    backward, encode, forward, EncoderConfig, EncoderInput, EncoderKind, EncoderParams, ForwardRecord, Gradients,
    DEFAULT_DIM, DEFAULT_GCN_DEPTH, DEFAULT_VOCAB,
};
use crate::graph::{encoder_graph, extract_path_contexts, PathContext, DEFAULT_MAX_CONTEXTS, DEFAULT_MAX_PATH_LEN};
use crate::lang::{parse_source, tokenize};
use crate::metrics::{evaluate_index, MetricReport, QueryMode, RetrievalIndex};
use crate::transform::file_seed;

/// Environment variable that, when set, replaces the seed of every config.
pub const SEED_ENV: &str = "CLONELAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Simclr,
    Moco,
    Swav,
}

impl Algorithm {
    pub fn default_temperature(self) -> f64 {
        match self {
            Algorithm::Simclr => SIMCLR_TEMPERATURE,
            Algorithm::Moco => MOCO_TEMPERATURE,
            Algorithm::Swav => SWAV_TEMPERATURE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub encoder: EncoderKind,
    pub algorithm: Algorithm,
    /// Treat every same-group item as a positive (SupCon, UniMoCo).
    pub supervised: bool,
    pub batch_size: usize,
    pub embedding_dim: usize,
    pub vocab: usize,
    pub gcn_depth: usize,
    pub lr_grid: Vec<f64>,
    pub epochs: usize,
    /// Falls back to the algorithm's default.
    pub temperature: Option<f64>,
    pub momentum: f64,
    pub queue_size: usize,
    pub prototypes: usize,
    pub same_problem_batches: bool,
    /// Retrieval depth for validation and test; defaults from the corpus.
    pub r: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            encoder: EncoderKind::Gcn,
            algorithm: Algorithm::Simclr,
            supervised: false,
            batch_size: 80,
            embedding_dim: DEFAULT_DIM,
            vocab: DEFAULT_VOCAB,
            gcn_depth: DEFAULT_GCN_DEPTH,
            lr_grid: vec![1e-2, 1e-3, 1e-4, 1e-5],
            epochs: 50,
            temperature: None,
            momentum: DEFAULT_MOMENTUM,
            queue_size: 15_360,
            prototypes: 100,
            same_problem_batches: false,
            r: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.batch_size < 2 {
            return bad(format!("batch_size must be at least 2, got {}", self.batch_size));
        }
        if self.lr_grid.is_empty() {
            return bad("lr_grid is empty".into());
        }
        if let Some(lr) = self.lr_grid.iter().find(|lr| !(lr.is_finite() && **lr > 0.0)) {
            return bad(format!("learning rate {lr} is not positive"));
        }
        if self.embedding_dim == 0 || self.vocab == 0 {
            return bad("embedding_dim and vocab must be positive".into());
        }
        if self.r == Some(0) {
            return bad("r must be positive".into());
        }
        if self.algorithm == Algorithm::Swav && self.prototypes < 2 {
            return bad(format!("SwAV needs at least 2 prototypes, got {}", self.prototypes));
        }
        Ok(())
    }

    pub fn temperature(&self) -> f64 {
        self.temperature.unwrap_or(self.algorithm.default_temperature())
    }

    pub fn encoder_config(&self) -> EncoderConfig {
        EncoderConfig { kind: self.encoder, dim: self.embedding_dim, vocab: self.vocab, depth: self.gcn_depth }
    }

    pub fn from_yaml_str(text: &str) -> Result<Self, HarnessError> {
        let config: TrainConfig = serde_yaml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_yaml_string(&self) -> Result<String, HarnessError> {
        Ok(serde_yaml::to_string(self)?)
    }

    /// Applies the seed override from the environment, if any.
    pub fn with_env_seed(mut self) -> Result<Self, HarnessError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| HarnessError::InvalidConfig(format!("{SEED_ENV}={v} is not a u64")))?;
        }
        Ok(self)
    }
}

/// Encoder inputs for every file of `corpus`, in file order. Path contexts
/// are sampled with a per-file seed so the same file always gets the same
/// contexts.
pub fn prepare_inputs(corpus: &Corpus, config: &EncoderConfig) -> Result<Vec<EncoderInput>, HarnessError> {
    corpus
        .files
        .par_iter()
        .map(|f| {
            let parse_err = |reason: String| HarnessError::Parse { file: f.id.clone(), reason };
            Ok(match config.kind {
                EncoderKind::Bow => {
                    EncoderInput::from_tokens(&tokenize(&f.source).map_err(|e| parse_err(e.to_string()))?, config.vocab)
                }
                EncoderKind::Paths => {
                    let ast = parse_source(&f.source).map_err(|e| parse_err(e.to_string()))?;
                    let mut rng = ChaCha8Rng::seed_from_u64(file_seed(&f.id));
                    let contexts = extract_path_contexts(&ast, DEFAULT_MAX_CONTEXTS, DEFAULT_MAX_PATH_LEN, &mut rng)
                        .unwrap_or_else(|_| {
                            let leaf = ast.preorder().into_iter().find(|&id| ast.children(id).is_empty());
                            leaf.map(|l| vec![PathContext::degenerate(&ast, l)]).unwrap_or_default()
                        });
                    EncoderInput::from_paths(&contexts, config.vocab)
                }
                EncoderKind::Gcn => {
                    let ast = parse_source(&f.source).map_err(|e| parse_err(e.to_string()))?;
                    EncoderInput::from_graph(&encoder_graph(&ast), config.vocab)
                }
            })
        })
        .collect()
}

fn retrieval_depth(corpus: &Corpus, r: Option<usize>) -> Result<usize, HarnessError> {
    match r {
        Some(r) => Ok(r),
        None => corpus.default_r().ok_or(HarnessError::NoClonePairs),
    }
}

fn report_from_embeddings(corpus: &Corpus, embeddings: Vec<Vec<f64>>, r: usize) -> Result<MetricReport, HarnessError> {
    let items = corpus.files.iter().zip(embeddings).map(|(f, e)| (f.id.clone(), f.group, e)).collect();
    Ok(evaluate_index(&RetrievalIndex::from_embeddings(items)?, r, QueryMode::ExcludeSelf, false)?)
}

fn evaluate_inputs(corpus: &Corpus, inputs: &[EncoderInput], params: &EncoderParams, r: usize) -> Result<MetricReport, HarnessError> {
    let embeddings = inputs.par_iter().map(|i| encode(params, i)).collect::<Result<Vec<_>, _>>()?;
    report_from_embeddings(corpus, embeddings, r)
}

/// Embeds the corpus with the encoder alone and scores retrieval.
pub fn evaluate(corpus: &Corpus, params: &EncoderParams, r: Option<usize>) -> Result<MetricReport, HarnessError> {
    if corpus.is_empty() {
        return Err(HarnessError::EmptyCorpus);
    }
    let inputs = prepare_inputs(corpus, &params.config())?;
    evaluate_inputs(corpus, &inputs, params, retrieval_depth(corpus, r)?)
}

/// Scores retrieval with a token-based detector's pairwise similarities.
pub fn evaluate_detector(corpus: &Corpus, detector: Detector, r: Option<usize>) -> Result<MetricReport, HarnessError> {
    if corpus.is_empty() {
        return Err(HarnessError::EmptyCorpus);
    }
    let sources: Vec<String> = corpus.files.iter().map(|f| f.source.clone()).collect();
    let rows = similarity_matrix(&sources, detector);
    let ids = corpus.files.iter().map(|f| f.id.clone()).collect();
    let groups = corpus.files.iter().map(|f| f.group).collect();
    let index = RetrievalIndex::from_similarities(ids, groups, rows)?;
    Ok(evaluate_index(&index, retrieval_depth(corpus, r)?, QueryMode::ExcludeSelf, false)?)
}

/// Reference point: one uniform random vector per file.
pub fn evaluate_random(corpus: &Corpus, dim: usize, seed: u64, r: Option<usize>) -> Result<MetricReport, HarnessError> {
    if corpus.is_empty() {
        return Err(HarnessError::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let embeddings = corpus.files.iter().map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    report_from_embeddings(corpus, embeddings, retrieval_depth(corpus, r)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrRun {
    pub lr: f64,
    /// Mean training loss per epoch.
    pub train_loss: Vec<f64>,
    /// Validation MAP@R before training and after every epoch.
    pub val_map: Vec<f64>,
    pub diverged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub run: usize,
    pub lr: f64,
    /// 0 is the initialization.
    pub epoch: usize,
    pub val_map: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: TrainConfig,
    pub r: usize,
    pub runs: Vec<LrRun>,
    pub selected: Selection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<MetricReport>,
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub record: RunRecord,
    /// Encoder of the selected checkpoint; the projection head is discarded.
    pub params: EncoderParams,
}

enum AlgorithmState {
    Simclr,
    Moco(Box<MocoState>),
    Swav(SwavState),
}

struct View {
    record: ForwardRecord,
    head_record: HeadRecord,
    z: Vec<f64>,
}

struct Trainer<'a> {
    config: &'a TrainConfig,
    inputs: &'a [EncoderInput],
    params: EncoderParams,
    head: ProjectionHead,
    state: AlgorithmState,
    lr: f64,
    /// Source of never-repeating group ids for unsupervised MoCo.
    fresh_group: usize,
}

impl<'a> Trainer<'a> {
    fn new(config: &'a TrainConfig, inputs: &'a [EncoderInput], lr: f64) -> Result<Self, HarnessError> {
        let params = EncoderParams::init(&config.encoder_config(), config.seed);
        let head = ProjectionHead::init(config.embedding_dim, config.seed.wrapping_add(1));
        let state = match config.algorithm {
            Algorithm::Simclr => AlgorithmState::Simclr,
            Algorithm::Moco => {
                AlgorithmState::Moco(Box::new(MocoState::new(&params, &head, config.queue_size, config.momentum)?))
            }
            Algorithm::Swav => AlgorithmState::Swav(SwavState::new(
                config.prototypes,
                config.embedding_dim,
                config.temperature(),
                config.seed.wrapping_add(2),
            )?),
        };
        Ok(Trainer { config, inputs, params, head, state, lr, fresh_group: usize::MAX / 2 })
    }

    fn views(&self, files: &[usize]) -> Result<Vec<View>, HarnessError> {
        files
            .par_iter()
            .map(|&i| {
                let (h, record) = forward(&self.params, &self.inputs[i])?;
                let (z, head_record) = self.head.forward(&h)?;
                Ok(View { record, head_record, z })
            })
            .collect()
    }

    fn backward(&self, views: &[View], upstream: &[Vec<f64>]) -> Result<(Gradients, HeadGradients), HarnessError> {
        let parts = views
            .par_iter()
            .zip(upstream)
            .map(|(v, g)| {
                let (hg, gh) = self.head.backward(&v.head_record, g);
                Ok((backward(&self.params, &v.record, &gh)?, hg))
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        let mut enc = Gradients::zeros_like(&self.params);
        let mut head = HeadGradients::zeros(self.head.dim());
        for (e, h) in &parts {
            enc.add_assign(e);
            head.add_assign(h);
        }
        Ok((enc, head))
    }

    fn update(&mut self, enc: &Gradients, head: &HeadGradients) {
        self.params.apply_gradients(enc, self.lr);
        self.head.apply_gradients(head, self.lr);
    }

    /// One optimizer step; returns the batch loss.
    fn step(&mut self, batch: &Batch) -> Result<f64, HarnessError> {
        let anchors: Vec<usize> = batch.pairs.iter().map(|p| p.anchor).collect();
        let positives: Vec<usize> = batch.pairs.iter().map(|p| p.positive).collect();
        let tau = self.config.temperature();
        let q = self.views(&anchors)?;
        let zq: Vec<Vec<f64>> = q.iter().map(|v| v.z.clone()).collect();
        match &mut self.state {
            AlgorithmState::Simclr => {
                let k = self.views(&positives)?;
                let zk: Vec<Vec<f64>> = k.iter().map(|v| v.z.clone()).collect();
                let loss = if self.config.supervised {
                    supcon_batch_loss(&zq, &zk, &batch.groups(), tau)?
                } else {
                    simclr_batch_loss(&zq, &zk, tau)?
                };
                let (mut enc, mut head) = self.backward(&q, &loss.grad_q)?;
                let (enc_k, head_k) = self.backward(&k, &loss.grad_k)?;
                enc.add_assign(&enc_k);
                head.add_assign(&head_k);
                self.update(&enc, &head);
                Ok(loss.loss)
            }
            AlgorithmState::Moco(state) => {
                let zk = positives
                    .par_iter()
                    .map(|&i| {
                        let h = encode(&state.key_encoder, &self.inputs[i])?;
                        Ok(state.key_head.forward(&h)?.0)
                    })
                    .collect::<Result<Vec<_>, HarnessError>>()?;
                let groups = if self.config.supervised {
                    batch.groups()
                } else {
                    let start = self.fresh_group;
                    self.fresh_group += anchors.len();
                    (start..self.fresh_group).collect()
                };
                let out = moco_step(state, &zq, &zk, &groups, tau)?;
                let (enc, head) = self.backward(&q, &out.grad_q)?;
                self.update(&enc, &head);
                if let AlgorithmState::Moco(state) = &mut self.state {
                    moco_momentum_update(state, &self.params, &self.head)?;
                }
                Ok(out.loss)
            }
            AlgorithmState::Swav(_) => {
                let k = self.views(&positives)?;
                let zk: Vec<Vec<f64>> = k.iter().map(|v| v.z.clone()).collect();
                let AlgorithmState::Swav(state) = &self.state else { unreachable!() };
                let out = swav_step(state, &zq, &zk)?;
                let (mut enc, mut head) = self.backward(&q, &out.grad_q)?;
                let (enc_k, head_k) = self.backward(&k, &out.grad_k)?;
                enc.add_assign(&enc_k);
                head.add_assign(&head_k);
                self.update(&enc, &head);
                if let AlgorithmState::Swav(state) = &mut self.state {
                    state.apply_gradients(&out.grad_prototypes, self.lr);
                }
                Ok(out.loss)
            }
        }
    }

    fn healthy(&self) -> bool {
        self.params.is_finite() && self.head.is_finite()
    }
}

/// Grid search over learning rates with validation-based checkpoint
/// selection. Every grid entry starts from the same seeded initialization;
/// a run whose loss or parameters stop being finite is cut short and marked
/// diverged.
pub fn train(train_set: &Corpus, val_set: &Corpus, config: &TrainConfig) -> Result<TrainedModel, HarnessError> {
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(HarnessError::EmptyCorpus);
    }
    let enc_config = config.encoder_config();
    let train_inputs = prepare_inputs(train_set, &enc_config)?;
    let val_inputs = prepare_inputs(val_set, &enc_config)?;
    let r = retrieval_depth(val_set, config.r)?;

    let mut runs = Vec::with_capacity(config.lr_grid.len());
    let mut best: Option<(Selection, EncoderParams)> = None;
    let consider = |sel: Selection, params: &EncoderParams, best: &mut Option<(Selection, EncoderParams)>| {
        if best.as_ref().is_none_or(|(b, _)| sel.val_map > b.val_map) {
            *best = Some((sel, params.clone()));
        }
    };
    for (run, &lr) in config.lr_grid.iter().enumerate() {
        let mut trainer = Trainer::new(config, &train_inputs, lr)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let initial = evaluate_inputs(val_set, &val_inputs, &trainer.params, r)?.map_at_r;
        let mut record = LrRun { lr, train_loss: Vec::new(), val_map: vec![initial], diverged: false };
        consider(Selection { run, lr, epoch: 0, val_map: initial }, &trainer.params, &mut best);
        'epochs: for epoch in 1..=config.epochs {
            let batches = make_batches(train_set, config.batch_size, config.same_problem_batches, &mut rng)?;
            let mut total = 0.0;
            for batch in &batches {
                let loss = match trainer.step(batch) {
                    Ok(l) => l,
                    Err(HarnessError::Contrastive(_)) | Err(HarnessError::Encode(_)) if !trainer.healthy() => f64::NAN,
                    Err(e) => return Err(e),
                };
                if !loss.is_finite() || !trainer.healthy() {
                    record.diverged = true;
                    break 'epochs;
                }
                total += loss;
            }
            record.train_loss.push(if batches.is_empty() { 0.0 } else { total / batches.len() as f64 });
            let val = evaluate_inputs(val_set, &val_inputs, &trainer.params, r)?.map_at_r;
            record.val_map.push(val);
            consider(Selection { run, lr, epoch, val_map: val }, &trainer.params, &mut best);
        }
        runs.push(record);
    }
    if runs.iter().all(|r| r.diverged) {
        return Err(HarnessError::AllRunsDiverged);
    }
    let (selected, params) = best.expect("the initialization is always considered");
    Ok(TrainedModel { record: RunRecord { config: config.clone(), r, runs, selected, test: None }, params })
}
