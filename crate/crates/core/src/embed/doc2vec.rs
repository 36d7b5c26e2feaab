//! Distributed bag-of-words paragraph vectors (PV-DBOW) with negative
//! sampling.
//!
//! For every (document, token) pair the document vector `d` and the output
//! vectors `u` of the target token and `k` sampled negatives are moved along
//! the gradient of
//!
//! ```text
//! J = log sigmoid(d . u_target) + sum_k log sigmoid(-d . u_k)
//! ```
//!
//! Tokens are sampled for negatives proportionally to `count^ns_exponent`,
//! and frequent tokens are randomly skipped (word2vec downsampling). The
//! learning rate decays linearly from `learning_rate` to `min_learning_rate`.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{Document, Vocabulary};
use crate::{seed, Error, Result};

/// Tokens in a 30,000-graph, 40-node corpus at WL depth 2, the reference
/// scale of the default downsampling rate.
pub const REFERENCE_CORPUS_TOKENS: u64 = 30_000 * 40 * 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocModelConfig {
    pub dims: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_learning_rate: f64,
    pub negative: usize,
    pub downsample: f64,
    /// Corpus size (in tokens) that `downsample` is relative to; `None`
    /// uses the training corpus. Pinning it keeps the absolute frequency
    /// threshold independent of how many graphs are trained on.
    pub downsample_tokens: Option<u64>,
    pub ns_exponent: f64,
    /// `1` trains sequentially and is bit-reproducible. More workers train
    /// lock-free in parallel and are not reproducible.
    pub workers: usize,
}

impl Default for DocModelConfig {
    fn default() -> Self {
        DocModelConfig {
            dims: 128,
            epochs: 100,
            learning_rate: 0.065,
            min_learning_rate: 1e-4,
            negative: 15,
            downsample: 1e-4,
            downsample_tokens: Some(REFERENCE_CORPUS_TOKENS),
            ns_exponent: 0.75,
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocModel {
    pub config: DocModelConfig,
    pub seed: u64,
    pub vocabulary: Vocabulary,
    /// Row-major `|vocabulary| x dims` output vectors.
    token_vectors: Vec<f64>,
    /// Row-major `|documents| x dims` document vectors.
    doc_vectors: Vec<f64>,
    /// Mean per-pair loss `-J` of every epoch, 0 when downsampling skipped
    /// every pair.
    pub epoch_loss: Vec<f64>,
    /// Number of trained (document, token) pairs per epoch.
    pub epoch_pairs: Vec<usize>,
}

/// Result of projecting a new document.
#[derive(Clone, Debug, PartialEq)]
pub struct Inference {
    pub vector: Vec<f64>,
    /// Number of document tokens present in the vocabulary.
    pub known_tokens: usize,
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `dJ/d(score)` for one output row: `label - sigmoid(score)`.
fn score_coefficient(positive: bool, score: f64) -> f64 {
    f64::from(u8::from(positive)) - sigmoid(score)
}

/// Per-pair objective `J` for a document vector, its target output vector
/// and the negative output vectors.
pub fn pair_objective(doc: &[f64], target: &[f64], negatives: &[&[f64]]) -> f64 {
    log_sigmoid(dot(doc, target)) + negatives.iter().map(|u| log_sigmoid(-dot(doc, u))).sum::<f64>()
}

/// Analytic gradient of [`pair_objective`].
#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient {
    pub doc: Vec<f64>,
    pub target: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn pair_gradient(doc: &[f64], target: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let rows = std::iter::once((true, target)).chain(negatives.iter().map(|u| (false, *u)));
    let mut grad_doc = vec![0.0; doc.len()];
    let mut grads = Vec::with_capacity(negatives.len() + 1);
    for (positive, u) in rows {
        let g = score_coefficient(positive, dot(doc, u));
        for (gd, ui) in grad_doc.iter_mut().zip(u) {
            *gd += g * ui;
        }
        grads.push(doc.iter().map(|d| g * d).collect::<Vec<_>>());
    }
    let target = grads.remove(0);
    PairGradient {
        doc: grad_doc,
        target,
        negatives: grads,
    }
}

/// Storage for output vectors, dense or shared between Hogwild workers.
trait TokenRows {
    fn dot_row(&self, row: usize, v: &[f64]) -> f64;
    /// `out += coeff * row`
    fn accumulate(&self, row: usize, coeff: f64, out: &mut [f64]);
    /// `row += coeff * v`
    fn update(&mut self, row: usize, coeff: f64, v: &[f64]);
}

struct Dense<'a> {
    data: &'a mut [f64],
    dims: usize,
}

impl TokenRows for Dense<'_> {
    fn dot_row(&self, row: usize, v: &[f64]) -> f64 {
        dot(&self.data[row * self.dims..(row + 1) * self.dims], v)
    }
    fn accumulate(&self, row: usize, coeff: f64, out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(&self.data[row * self.dims..(row + 1) * self.dims]) {
            *o += coeff * x;
        }
    }
    fn update(&mut self, row: usize, coeff: f64, v: &[f64]) {
        for (x, vi) in self.data[row * self.dims..(row + 1) * self.dims].iter_mut().zip(v) {
            *x += coeff * vi;
        }
    }
}

/// Read-only rows for inference.
struct Frozen<'a> {
    data: &'a [f64],
    dims: usize,
}

impl TokenRows for Frozen<'_> {
    fn dot_row(&self, row: usize, v: &[f64]) -> f64 {
        dot(&self.data[row * self.dims..(row + 1) * self.dims], v)
    }
    fn accumulate(&self, row: usize, coeff: f64, out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(&self.data[row * self.dims..(row + 1) * self.dims]) {
            *o += coeff * x;
        }
    }
    fn update(&mut self, _row: usize, _coeff: f64, _v: &[f64]) {}
}

/// Racy shared rows: relaxed loads and stores of `f64` bit patterns.
#[derive(Clone, Copy)]
struct Shared<'a> {
    data: &'a [AtomicU64],
    dims: usize,
}

impl Shared<'_> {
    fn get(&self, i: usize) -> f64 {
        f64::from_bits(self.data[i].load(Ordering::Relaxed))
    }
}

impl TokenRows for Shared<'_> {
    fn dot_row(&self, row: usize, v: &[f64]) -> f64 {
        (0..self.dims).map(|j| self.get(row * self.dims + j) * v[j]).sum()
    }
    fn accumulate(&self, row: usize, coeff: f64, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o += coeff * self.get(row * self.dims + j);
        }
    }
    fn update(&mut self, row: usize, coeff: f64, v: &[f64]) {
        for (j, vi) in v.iter().enumerate() {
            let i = row * self.dims + j;
            self.data[i].store((self.get(i) + coeff * vi).to_bits(), Ordering::Relaxed);
        }
    }
}

/// One SGD ascent step on a (document, token) pair; returns the pair loss
/// `-J` before the step.
fn sgd_pair<R: TokenRows>(
    doc: &mut [f64],
    target: usize,
    negatives: &[usize],
    rows: &mut R,
    alpha: f64,
    doc_grad: &mut [f64],
) -> f64 {
    doc_grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for (k, row) in std::iter::once(target).chain(negatives.iter().copied()).enumerate() {
        let positive = k == 0;
        let score = rows.dot_row(row, doc);
        loss -= if positive { log_sigmoid(score) } else { log_sigmoid(-score) };
        let g = score_coefficient(positive, score);
        rows.accumulate(row, g, doc_grad);
        rows.update(row, alpha * g, doc);
    }
    for (d, g) in doc.iter_mut().zip(doc_grad.iter()) {
        *d += alpha * g;
    }
    loss
}

/// Shared sampling state derived from the vocabulary.
struct Sampler {
    keep: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(vocab: &Vocabulary, config: &DocModelConfig) -> Self {
        let total = config.downsample_tokens.unwrap_or_else(|| vocab.total()) as f64;
        let threshold = config.downsample * total;
        let keep = vocab
            .counts()
            .iter()
            .map(|&c| {
                if config.downsample <= 0.0 {
                    1.0
                } else {
                    let c = c as f64;
                    (((c / threshold).sqrt() + 1.0) * threshold / c).min(1.0)
                }
            })
            .collect();
        let mut acc = 0.0;
        let cumulative = vocab
            .counts()
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(config.ns_exponent);
                acc
            })
            .collect();
        Sampler { keep, cumulative }
    }

    fn keep(&self, token: usize, rng: &mut ChaCha8Rng) -> bool {
        let p = self.keep[token];
        p >= 1.0 || rng.gen::<f64>() < p
    }

    fn negatives(&self, target: usize, k: usize, rng: &mut ChaCha8Rng, out: &mut Vec<usize>) {
        out.clear();
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        for _ in 0..k {
            let x = rng.gen::<f64>() * total;
            let idx = self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1);
            if idx != target {
                out.push(idx);
            }
        }
    }
}

fn init_vector(rng: &mut ChaCha8Rng, dims: usize) -> Vec<f64> {
    (0..dims).map(|_| (rng.gen::<f64>() - 0.5) / dims as f64).collect()
}

fn learning_rate(config: &DocModelConfig, epoch: usize) -> f64 {
    let progress = epoch as f64 / config.epochs.max(1) as f64;
    config.learning_rate - (config.learning_rate - config.min_learning_rate) * progress
}

impl DocModel {
    pub fn train(documents: &[Document], config: &DocModelConfig, seed: u64) -> Result<DocModel> {
        if documents.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "doc-vector training needs at least 2 documents, got {}",
                documents.len()
            )));
        }
        if config.dims == 0 || config.epochs == 0 {
            return Err(Error::InvalidInput("dims and epochs must be positive".into()));
        }
        let vocabulary = Vocabulary::build(documents);
        if vocabulary.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let dims = config.dims;
        let sampler = Sampler::new(&vocabulary, config);
        let docs: Vec<Vec<usize>> = documents
            .iter()
            .map(|d| {
                d.tokens()
                    .iter()
                    .map(|&t| vocabulary.index_of(t).expect("vocabulary built from corpus"))
                    .collect()
            })
            .collect();

        let mut init_rng = seed::stream_rng(seed, 0);
        let mut doc_vectors: Vec<f64> = (0..docs.len())
            .flat_map(|_| init_vector(&mut init_rng, dims))
            .collect();
        let mut token_vectors = vec![0.0; vocabulary.len() * dims];
        let mut epoch_loss = Vec::with_capacity(config.epochs);
        let mut epoch_pairs = Vec::with_capacity(config.epochs);

        if config.workers <= 1 {
            let mut rng = seed::stream_rng(seed, 1);
            let mut negs = Vec::with_capacity(config.negative);
            let mut grad = vec![0.0; dims];
            let mut order: Vec<usize> = (0..docs.len()).collect();
            for epoch in 0..config.epochs {
                let alpha = learning_rate(config, epoch);
                rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
                let (mut loss, mut pairs) = (0.0, 0usize);
                let mut rows = Dense {
                    data: &mut token_vectors,
                    dims,
                };
                for &d in &order {
                    let doc = &mut doc_vectors[d * dims..(d + 1) * dims];
                    for &t in &docs[d] {
                        if !sampler.keep(t, &mut rng) {
                            continue;
                        }
                        sampler.negatives(t, config.negative, &mut rng, &mut negs);
                        loss += sgd_pair(doc, t, &negs, &mut rows, alpha, &mut grad);
                        pairs += 1;
                    }
                }
                epoch_loss.push(loss / pairs.max(1) as f64);
                epoch_pairs.push(pairs);
            }
        } else {
            let shared_tokens: Vec<AtomicU64> =
                token_vectors.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
            let shared_docs: Vec<AtomicU64> =
                doc_vectors.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
            let workers = config.workers;
            for epoch in 0..config.epochs {
                let alpha = learning_rate(config, epoch);
                let results: Vec<(f64, usize)> = (0..workers)
                    .into_par_iter()
                    .map(|w| {
                        let mut rng = seed::stream_rng(seed::derive_seed(seed, epoch as u64), 2 + w as u64);
                        let mut rows = Shared {
                            data: &shared_tokens,
                            dims,
                        };
                        let doc_rows = Shared {
                            data: &shared_docs,
                            dims,
                        };
                        let mut negs = Vec::new();
                        let mut grad = vec![0.0; dims];
                        let (mut loss, mut pairs) = (0.0, 0usize);
                        for d in (w..docs.len()).step_by(workers) {
                            let mut doc: Vec<f64> = (0..dims).map(|j| doc_rows.get(d * dims + j)).collect();
                            for &t in &docs[d] {
                                if !sampler.keep(t, &mut rng) {
                                    continue;
                                }
                                sampler.negatives(t, config.negative, &mut rng, &mut negs);
                                loss += sgd_pair(&mut doc, t, &negs, &mut rows, alpha, &mut grad);
                                pairs += 1;
                            }
                            for (j, x) in doc.iter().enumerate() {
                                shared_docs[d * dims + j].store(x.to_bits(), Ordering::Relaxed);
                            }
                        }
                        (loss, pairs)
                    })
                    .collect();
                let (loss, pairs) = results
                    .into_iter()
                    .fold((0.0, 0), |acc, (l, p)| (acc.0 + l, acc.1 + p));
                epoch_loss.push(loss / pairs.max(1) as f64);
                epoch_pairs.push(pairs);
            }
            token_vectors = shared_tokens.iter().map(|a| f64::from_bits(a.load(Ordering::Relaxed))).collect();
            doc_vectors = shared_docs.iter().map(|a| f64::from_bits(a.load(Ordering::Relaxed))).collect();
        }

        Ok(DocModel {
            config: config.clone(),
            seed,
            vocabulary,
            token_vectors,
            doc_vectors,
            epoch_loss,
            epoch_pairs,
        })
    }

    pub fn dims(&self) -> usize {
        self.config.dims
    }

    pub fn document_count(&self) -> usize {
        self.doc_vectors.len() / self.config.dims
    }

    pub fn doc_vector(&self, i: usize) -> &[f64] {
        let dims = self.config.dims;
        &self.doc_vectors[i * dims..(i + 1) * dims]
    }

    pub fn token_vector(&self, token_index: usize) -> &[f64] {
        let dims = self.config.dims;
        &self.token_vectors[token_index * dims..(token_index + 1) * dims]
    }

    /// Starting point of [`DocModel::infer`] for `doc`; returned unchanged
    /// when no token of `doc` is known.
    pub fn initial_inference_vector(&self, doc: &Document) -> Vec<f64> {
        let s = seed::derive_seed(self.seed, doc.digest());
        init_vector(&mut seed::stream_rng(s, 0), self.config.dims)
    }

    /// Fits a fresh document vector against the frozen output vectors with
    /// the training schedule. The random stream is derived from the model
    /// seed and the token multiset, so isomorphic graphs infer identically.
    pub fn infer(&self, doc: &Document) -> Inference {
        let dims = self.config.dims;
        let tokens: Vec<usize> = doc
            .tokens()
            .iter()
            .filter_map(|&t| self.vocabulary.index_of(t))
            .collect();
        let mut vector = self.initial_inference_vector(doc);
        if tokens.is_empty() {
            log::warn!("document has no known tokens; returning its initial vector");
            return Inference {
                vector,
                known_tokens: 0,
            };
        }
        let sampler = Sampler::new(&self.vocabulary, &self.config);
        let mut rng = seed::stream_rng(seed::derive_seed(self.seed, doc.digest()), 1);
        let mut rows = Frozen {
            data: &self.token_vectors,
            dims,
        };
        let mut negs = Vec::with_capacity(self.config.negative);
        let mut grad = vec![0.0; dims];
        for epoch in 0..self.config.epochs {
            let alpha = learning_rate(&self.config, epoch);
            for &t in &tokens {
                if !sampler.keep(t, &mut rng) {
                    continue;
                }
                sampler.negatives(t, self.config.negative, &mut rng, &mut negs);
                sgd_pair(&mut vector, t, &negs, &mut rows, alpha, &mut grad);
            }
        }
        Inference {
            vector,
            known_tokens: tokens.len(),
        }
    }
}
