//! Desk-scale joint training of bilingual word embeddings: one skip-gram
//! negative-sampling objective per language plus a cross-lingual
//! regularizer over aligned sentence pairs, so both vocabularies land in a
//! single shared space.
//!
//! The regularizer needs no word alignment: for an aligned sentence pair it
//! penalizes `lambda / 2 * |mean(s1 vectors) - mean(s2 vectors)|^2`, pulling
//! the sentence means of the two languages together. One parallel-pair
//! update is interleaved after every monolingual sentence, cycling the
//! parallel corpus.
//!
//! Training is single-threaded and fully deterministic for a fixed seed:
//! language one consumes a generator seeded with `config.seed`, language
//! two with `config.seed + 1`. With `lambda = 0` the run is bit-identical
//! to two independent monolingual trainings with those seeds (see
//! [`train_monolingual`]).

use std::collections::HashMap;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::embedding::{Collection, EmbeddingSet};
use crate::text::{preprocess, DocKind, Document};
use crate::util::read_to_string;

#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptySentence: regularizer input sentence has no vectors")]
    EmptySentence,
    #[error("DimMismatch: vectors of dimension {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("EmptyVocabulary: language {language:?} has no tokens after min_count filtering")]
    EmptyVocabulary { language: String },
    #[error("NonFiniteLoss: training diverged at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("EmptyParallelCorpus: no usable aligned sentence pairs")]
    EmptyParallelCorpus,
    #[error("LineCountMismatch: {left} lines vs {right} lines")]
    LineCountMismatch { left: usize, right: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Sentence-aligned parallel corpus for the cross-lingual regularizer.
#[derive(Debug, Clone)]
pub struct ParallelCorpus {
    pairs: Vec<(Vec<String>, Vec<String>)>,
    languages: (String, String),
}

impl ParallelCorpus {
    pub fn new(
        pairs: Vec<(Vec<String>, Vec<String>)>,
        languages: (String, String),
    ) -> Result<Self> {
        let pairs: Vec<_> = pairs
            .into_iter()
            .filter(|(a, b)| !a.is_empty() && !b.is_empty())
            .collect();
        if pairs.is_empty() {
            return Err(Error::EmptyParallelCorpus);
        }
        Ok(Self { pairs, languages })
    }

    /// Reads two plain-text files where line `i` of the first is aligned to
    /// line `i` of the second. Lines are preprocessed like news text; pairs
    /// with an empty side are dropped.
    pub fn from_files(
        path_l1: impl AsRef<Path>,
        path_l2: impl AsRef<Path>,
        languages: (String, String),
    ) -> Result<Self> {
        let a = read_to_string(path_l1.as_ref())?;
        let b = read_to_string(path_l2.as_ref())?;
        let lines_a: Vec<&str> = a.lines().collect();
        let lines_b: Vec<&str> = b.lines().collect();
        if lines_a.len() != lines_b.len() {
            return Err(Error::LineCountMismatch {
                left: lines_a.len(),
                right: lines_b.len(),
            });
        }
        let pairs = lines_a
            .iter()
            .zip(&lines_b)
            .map(|(la, lb)| {
                (
                    preprocess(la, DocKind::News, &languages.0, "").tokens,
                    preprocess(lb, DocKind::News, &languages.1, "").tokens,
                )
            })
            .collect();
        Self::new(pairs, languages)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Vec<String>, Vec<String>)] {
        &self.pairs
    }

    pub fn languages(&self) -> (&str, &str) {
        (&self.languages.0, &self.languages.1)
    }
}

#[derive(Debug, Clone)]
pub struct BilingualTrainConfig {
    pub dim: usize,
    /// Context radius; symmetric by default, see `left_only`.
    pub window: usize,
    pub min_count: u64,
    /// Cross-lingual regularizer weight.
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negative_samples: usize,
    pub seed: u64,
    /// Restrict the context window to the left side of the center word.
    pub left_only: bool,
}

impl Default for BilingualTrainConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 5,
            min_count: 2,
            lambda: 1.0,
            epochs: 5,
            learning_rate: 0.025,
            negative_samples: 5,
            seed: 1,
            left_only: false,
        }
    }
}

impl BilingualTrainConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dim must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        if self.min_count == 0 {
            return Err(Error::InvalidConfig("min_count must be at least 1".into()));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(Error::InvalidConfig("lambda must be >= 0".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-epoch loss traces and final vocabulary sizes.
#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub mono_loss_l1: Vec<f64>,
    pub mono_loss_l2: Vec<f64>,
    pub regularizer_loss: Vec<f64>,
    pub vocab_size_l1: usize,
    pub vocab_size_l2: usize,
}

fn check_sentences(s1: &[Array1<f64>], s2: &[Array1<f64>]) -> Result<usize> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::EmptySentence);
    }
    let d = s1[0].len();
    for v in s1.iter().chain(s2.iter()) {
        if v.len() != d {
            return Err(Error::DimMismatch {
                left: d,
                right: v.len(),
            });
        }
    }
    Ok(d)
}

fn mean_of(vectors: &[Array1<f64>], d: usize) -> Array1<f64> {
    let mut mean = Array1::<f64>::zeros(d);
    for v in vectors {
        mean += v;
    }
    mean / vectors.len() as f64
}

/// Cross-lingual regularizer value `lambda / 2 * |mean(s1) - mean(s2)|^2`.
pub fn regularizer_loss(s1: &[Array1<f64>], s2: &[Array1<f64>], lambda: f64) -> Result<f64> {
    let d = check_sentences(s1, s2)?;
    let delta = mean_of(s1, d) - mean_of(s2, d);
    Ok(lambda * (0.5 * delta.dot(&delta)))
}

/// Gradients of [`regularizer_loss`] with respect to each vector: every
/// vector of sentence one shares the gradient `(lambda / m) * delta`, every
/// vector of sentence two `-(lambda / n) * delta`, where
/// `delta = mean(s1) - mean(s2)`.
pub fn regularizer_gradients(
    s1: &[Array1<f64>],
    s2: &[Array1<f64>],
    lambda: f64,
) -> Result<(Array1<f64>, Array1<f64>)> {
    let d = check_sentences(s1, s2)?;
    let delta = mean_of(s1, d) - mean_of(s2, d);
    let g1 = &delta * (lambda / s1.len() as f64);
    let g2 = &delta * (-lambda / s2.len() as f64);
    Ok((g1, g2))
}

struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
}

fn build_vocab(corpus: &[Document], min_count: u64, language: &str) -> Result<Vocab> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut first_seen: HashMap<String, usize> = HashMap::new();
    let mut position = 0usize;
    for doc in corpus.iter().filter(|d| !d.dropped) {
        for token in &doc.tokens {
            *counts.entry(token.clone()).or_insert(0) += 1;
            first_seen.entry(token.clone()).or_insert(position);
            position += 1;
        }
    }
    let mut kept: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary {
            language: language.to_string(),
        });
    }
    kept.sort_by_key(|(token, count)| (std::cmp::Reverse(*count), first_seen[token]));
    let tokens: Vec<String> = kept.iter().map(|(t, _)| t.clone()).collect();
    let counts: Vec<u64> = kept.iter().map(|(_, c)| *c).collect();
    let index = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocab {
        tokens,
        index,
        counts,
    })
}

/// `-ln sigmoid(x)`, computed stably for any finite `x`.
fn softplus_neg(x: f64) -> f64 {
    // -ln sigmoid(x) = ln(1 + e^{-x})
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-language training state. Both the joint and the standalone trainer
/// drive sentences through the same routine, so their update and RNG
/// streams coincide sentence for sentence.
struct LangTrainer {
    vocab: Vocab,
    sentences: Vec<Vec<usize>>,
    input: Array2<f64>,
    output: Array2<f64>,
    rng: ChaCha8Rng,
    negatives: WeightedIndex<f64>,
    scratch_center: Vec<f64>,
    scratch_grad: Vec<f64>,
}

impl LangTrainer {
    fn new(
        corpus: &[Document],
        config: &BilingualTrainConfig,
        language: &str,
        seed: u64,
    ) -> Result<Self> {
        let vocab = build_vocab(corpus, config.min_count, language)?;
        let sentences: Vec<Vec<usize>> = corpus
            .iter()
            .filter(|d| !d.dropped)
            .map(|d| {
                d.tokens
                    .iter()
                    .filter_map(|t| vocab.index.get(t).copied())
                    .collect::<Vec<usize>>()
            })
            .filter(|s| !s.is_empty())
            .collect();
        if sentences.is_empty() {
            return Err(Error::EmptyVocabulary {
                language: language.to_string(),
            });
        }
        let n = vocab.tokens.len();
        let d = config.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut input = Array2::<f64>::zeros((n, d));
        for v in input.iter_mut() {
            *v = (rng.random::<f64>() - 0.5) / d as f64;
        }
        let output = Array2::<f64>::zeros((n, d));
        let weights: Vec<f64> = vocab.counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        let negatives = WeightedIndex::new(&weights)
            .expect("counts are positive and nonempty");
        Ok(Self {
            vocab,
            sentences,
            input,
            output,
            rng,
            negatives,
            scratch_center: vec![0.0; d],
            scratch_grad: vec![0.0; d],
        })
    }

    /// One skip-gram pass over a sentence; returns (loss sum, pair count).
    fn train_sentence(&mut self, sentence_idx: usize, config: &BilingualTrainConfig) -> (f64, u64) {
        let sentence = std::mem::take(&mut self.sentences[sentence_idx]);
        let mut loss_sum = 0.0;
        let mut pairs = 0u64;
        let lr = config.learning_rate;
        for t in 0..sentence.len() {
            let center = sentence[t];
            let lo = t.saturating_sub(config.window);
            let hi = if config.left_only {
                t
            } else {
                (t + config.window + 1).min(sentence.len())
            };
            for (c, &context) in sentence.iter().enumerate().take(hi).skip(lo) {
                if c == t {
                    continue;
                }
                pairs += 1;
                self.scratch_center
                    .copy_from_slice(self.input.row(center).as_slice().expect("row major"));
                self.scratch_grad.fill(0.0);
                // Positive example, then negative draws from the unigram^0.75
                // table. A draw that hits the context token is skipped but
                // still consumes the generator.
                for k in 0..=config.negative_samples {
                    let (target, label) = if k == 0 {
                        (context, 1.0)
                    } else {
                        let neg = self.negatives.sample(&mut self.rng);
                        if neg == context {
                            continue;
                        }
                        (neg, 0.0)
                    };
                    let mut out_row = self.output.row_mut(target);
                    let out = out_row.as_slice_mut().expect("row major");
                    let mut dot = 0.0;
                    for (x, y) in self.scratch_center.iter().zip(out.iter()) {
                        dot += x * y;
                    }
                    loss_sum += if label == 1.0 {
                        softplus_neg(dot)
                    } else {
                        softplus_neg(-dot)
                    };
                    let g = (label - sigmoid(dot)) * lr;
                    for ((gr, o), x) in self
                        .scratch_grad
                        .iter_mut()
                        .zip(out.iter_mut())
                        .zip(self.scratch_center.iter())
                    {
                        *gr += g * *o;
                        *o += g * *x;
                    }
                }
                let mut center_row = self.input.row_mut(center);
                let center_slice = center_row.as_slice_mut().expect("row major");
                for (x, gr) in center_slice.iter_mut().zip(self.scratch_grad.iter()) {
                    *x += *gr;
                }
            }
        }
        self.sentences[sentence_idx] = sentence;
        (loss_sum, pairs)
    }

    fn into_embedding_set(self, language: &str, collection: Collection) -> EmbeddingSet {
        EmbeddingSet::from_parts_unchecked(
            self.vocab.tokens,
            self.vocab.index,
            self.input,
            language.to_string(),
            collection,
            false,
        )
    }
}

/// Standalone skip-gram training of one language; the reduction case of
/// [`train_bilingual`] with `lambda = 0`. Returns the embeddings and the
/// per-epoch mean loss trace.
pub fn train_monolingual(
    corpus: &[Document],
    language: &str,
    collection: Collection,
    config: &BilingualTrainConfig,
    seed: u64,
) -> Result<(EmbeddingSet, Vec<f64>)> {
    config.validate()?;
    let mut trainer = LangTrainer::new(corpus, config, language, seed)?;
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let mut loss_sum = 0.0;
        let mut pairs = 0u64;
        for s in 0..trainer.sentences.len() {
            let (l, p) = trainer.train_sentence(s, config);
            loss_sum += l;
            pairs += p;
        }
        let mean = if pairs > 0 { loss_sum / pairs as f64 } else { 0.0 };
        if !mean.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        epoch_losses.push(mean);
        log::info!("epoch {epoch}: {language} loss {mean:.6}");
    }
    Ok((trainer.into_embedding_set(language, collection), epoch_losses))
}

/// Joint bilingual training: both monolingual objectives plus the
/// cross-lingual regularizer applied over the parallel corpus. Outputs one
/// embedding set per language in a shared `dim`-dimensional space.
pub fn train_bilingual(
    corpus_l1: &[Document],
    corpus_l2: &[Document],
    parallel: &ParallelCorpus,
    config: &BilingualTrainConfig,
) -> Result<(EmbeddingSet, EmbeddingSet, TrainReport)> {
    config.validate()?;
    let (lang1, lang2) = parallel.languages();
    let mut l1 = LangTrainer::new(corpus_l1, config, lang1, config.seed)?;
    let mut l2 = LangTrainer::new(corpus_l2, config, lang2, config.seed.wrapping_add(1))?;

    // Resolve parallel pairs to vocabulary ids once; pairs with an empty
    // in-vocabulary side cannot receive updates and are dropped.
    let resolved: Vec<(Vec<usize>, Vec<usize>)> = parallel
        .pairs()
        .iter()
        .map(|(a, b)| {
            (
                a.iter().filter_map(|t| l1.vocab.index.get(t).copied()).collect::<Vec<_>>(),
                b.iter().filter_map(|t| l2.vocab.index.get(t).copied()).collect::<Vec<_>>(),
            )
        })
        .filter(|(a, b)| !a.is_empty() && !b.is_empty())
        .collect();
    if config.lambda > 0.0 && resolved.is_empty() {
        log::warn!("no parallel pair has in-vocabulary tokens on both sides; \
                    the regularizer will not fire");
    }

    let mut report = TrainReport {
        vocab_size_l1: l1.vocab.tokens.len(),
        vocab_size_l2: l2.vocab.tokens.len(),
        ..TrainReport::default()
    };

    let dim = config.dim;
    let mut delta = vec![0.0; dim];
    let mut next_pair = 0usize;
    let n_slots = l1.sentences.len().max(l2.sentences.len());
    for epoch in 0..config.epochs {
        let mut mono = [(0.0f64, 0u64), (0.0f64, 0u64)];
        let mut reg_sum = 0.0;
        let mut reg_updates = 0u64;

        let regularize = |l1: &mut LangTrainer,
                              l2: &mut LangTrainer,
                              next_pair: &mut usize,
                              reg_sum: &mut f64,
                              reg_updates: &mut u64,
                              delta: &mut [f64]| {
            if config.lambda == 0.0 || resolved.is_empty() {
                return;
            }
            let (ids1, ids2) = &resolved[*next_pair];
            *next_pair = (*next_pair + 1) % resolved.len();
            let m = ids1.len() as f64;
            let n = ids2.len() as f64;
            let mut sq = 0.0;
            for (j, d_j) in delta.iter_mut().enumerate() {
                let mut mean1 = 0.0;
                for &id in ids1 {
                    mean1 += l1.input[(id, j)];
                }
                let mut mean2 = 0.0;
                for &id in ids2 {
                    mean2 += l2.input[(id, j)];
                }
                *d_j = mean1 / m - mean2 / n;
                sq += *d_j * *d_j;
            }
            *reg_sum += config.lambda * (0.5 * sq);
            *reg_updates += 1;
            let step1 = config.learning_rate * config.lambda / m;
            let step2 = config.learning_rate * config.lambda / n;
            for &id in ids1 {
                for (j, d_j) in delta.iter().enumerate() {
                    l1.input[(id, j)] -= step1 * d_j;
                }
            }
            for &id in ids2 {
                for (j, d_j) in delta.iter().enumerate() {
                    l2.input[(id, j)] += step2 * d_j;
                }
            }
        };

        for slot in 0..n_slots {
            if slot < l1.sentences.len() {
                let (l, p) = l1.train_sentence(slot, config);
                mono[0].0 += l;
                mono[0].1 += p;
                regularize(
                    &mut l1,
                    &mut l2,
                    &mut next_pair,
                    &mut reg_sum,
                    &mut reg_updates,
                    &mut delta,
                );
            }
            if slot < l2.sentences.len() {
                let (l, p) = l2.train_sentence(slot, config);
                mono[1].0 += l;
                mono[1].1 += p;
                regularize(
                    &mut l1,
                    &mut l2,
                    &mut next_pair,
                    &mut reg_sum,
                    &mut reg_updates,
                    &mut delta,
                );
            }
        }

        let mean = |sum: f64, n: u64| if n > 0 { sum / n as f64 } else { 0.0 };
        let m1 = mean(mono[0].0, mono[0].1);
        let m2 = mean(mono[1].0, mono[1].1);
        let mr = mean(reg_sum, reg_updates);
        if !m1.is_finite() || !m2.is_finite() || !mr.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        report.mono_loss_l1.push(m1);
        report.mono_loss_l2.push(m2);
        report.regularizer_loss.push(mr);
        log::info!(
            "epoch {epoch}: {lang1} loss {m1:.6}, {lang2} loss {m2:.6}, regularizer {mr:.6}"
        );
    }

    Ok((
        l1.into_embedding_set(lang1, Collection::News),
        l2.into_embedding_set(lang2, Collection::News),
        report,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng;

    fn vecs(rows: &[[f64; 3]]) -> Vec<Array1<f64>> {
        rows.iter().map(|r| Array1::from_vec(r.to_vec())).collect()
    }

    #[test]
    fn regularizer_zero_when_means_coincide() {
        let s1 = vecs(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let s2 = vecs(&[[0.5, 0.5, 0.0]]);
        assert_eq!(regularizer_loss(&s1, &s2, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn regularizer_unit_delta() {
        // Means differ by a unit vector, lambda = 2 -> (2/2) * 1 = 1.
        let s1 = vecs(&[[1.0, 0.0, 0.0]]);
        let s2 = vecs(&[[0.0, 0.0, 0.0]]);
        assert_abs_diff_eq!(regularizer_loss(&s1, &s2, 2.0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn regularizer_empty_sentence_is_an_error() {
        let s1 = vecs(&[[1.0, 0.0, 0.0]]);
        assert!(matches!(
            regularizer_loss(&s1, &[], 1.0),
            Err(Error::EmptySentence)
        ));
        assert!(matches!(
            regularizer_loss(&[], &s1, 1.0),
            Err(Error::EmptySentence)
        ));
    }

    #[test]
    fn regularizer_dim_mismatch() {
        let s1 = vecs(&[[1.0, 0.0, 0.0]]);
        let s2 = vec![array![1.0, 2.0]];
        assert!(matches!(
            regularizer_loss(&s1, &s2, 1.0),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn regularizer_loss_is_nonnegative_and_scales_in_lambda() {
        let mut rng = crate::test_rng(51);
        for _ in 0..50 {
            let m = rng.random_range(1..5);
            let n = rng.random_range(1..5);
            let s1: Vec<Array1<f64>> = (0..m)
                .map(|_| Array1::from_shape_fn(4, |_| rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            let s2: Vec<Array1<f64>> = (0..n)
                .map(|_| Array1::from_shape_fn(4, |_| rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            let lambda = rng.random::<f64>() * 3.0 + 0.1;
            let base = regularizer_loss(&s1, &s2, lambda).unwrap();
            assert!(base >= 0.0);
            // Power-of-two scaling is exact.
            for s in [2.0, 4.0, 0.5] {
                let scaled = regularizer_loss(&s1, &s2, s * lambda).unwrap();
                assert_eq!(scaled.to_bits(), (s * base).to_bits());
            }
            // General scaling within rounding.
            let s = 1.7;
            let scaled = regularizer_loss(&s1, &s2, s * lambda).unwrap();
            assert_abs_diff_eq!(scaled, s * base, epsilon = 1e-12 * (1.0 + base));
        }
    }

    #[test]
    fn regularizer_gradient_matches_finite_differences() {
        let mut rng = crate::test_rng(53);
        let lambda = 1.7;
        let eps = 1e-4;
        for _ in 0..20 {
            let m = rng.random_range(1..4);
            let n = rng.random_range(1..4);
            let s1: Vec<Array1<f64>> = (0..m)
                .map(|_| Array1::from_shape_fn(5, |_| rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            let s2: Vec<Array1<f64>> = (0..n)
                .map(|_| Array1::from_shape_fn(5, |_| rng.random::<f64>() * 2.0 - 1.0))
                .collect();
            let (g1, g2) = regularizer_gradients(&s1, &s2, lambda).unwrap();
            for side in 0..2 {
                let (vectors, grad) = if side == 0 { (&s1, &g1) } else { (&s2, &g2) };
                for vi in 0..vectors.len() {
                    for j in 0..5 {
                        let mut plus = vectors.clone();
                        plus[vi][j] += eps;
                        let mut minus = vectors.clone();
                        minus[vi][j] -= eps;
                        let (lp, lm) = if side == 0 {
                            (
                                regularizer_loss(&plus, &s2, lambda).unwrap(),
                                regularizer_loss(&minus, &s2, lambda).unwrap(),
                            )
                        } else {
                            (
                                regularizer_loss(&s1, &plus, lambda).unwrap(),
                                regularizer_loss(&s1, &minus, lambda).unwrap(),
                            )
                        };
                        let fd = (lp - lm) / (2.0 * eps);
                        let analytic = grad[j];
                        let scale = analytic.abs().max(fd.abs()).max(1e-8);
                        assert!(
                            (fd - analytic).abs() / scale <= 1e-4,
                            "side {side} vector {vi} coord {j}: fd {fd} vs {analytic}"
                        );
                    }
                }
            }
        }
    }

    fn doc(id: &str, tokens: &[&str], lang: &str) -> Document {
        Document {
            id: id.into(),
            language: lang.into(),
            kind: DocKind::News,
            raw: String::new(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            dropped: false,
        }
    }

    /// Deterministic toy corpus: topic-clustered sentences over a small
    /// vocabulary, with l2 a token-renamed copy of l1.
    pub(crate) fn toy_corpora(
        n_sentences: usize,
        seed: u64,
    ) -> (Vec<Document>, Vec<Document>, ParallelCorpus) {
        let mut rng = crate::test_rng(seed);
        let topics: Vec<Vec<String>> = (0..5)
            .map(|t| (0..6).map(|w| format!("w{t}{w}")).collect())
            .collect();
        let mut l1_docs = Vec::with_capacity(n_sentences);
        let mut l2_docs = Vec::with_capacity(n_sentences);
        let mut pairs = Vec::with_capacity(n_sentences);
        for i in 0..n_sentences {
            let topic = &topics[rng.random_range(0..topics.len())];
            let len = rng.random_range(6..10);
            let tokens: Vec<String> = (0..len)
                .map(|_| topic[rng.random_range(0..topic.len())].clone())
                .collect();
            let renamed: Vec<String> = tokens.iter().map(|t| format!("x{t}")).collect();
            let refs1: Vec<&str> = tokens.iter().map(|s| s.as_str()).collect();
            let refs2: Vec<&str> = renamed.iter().map(|s| s.as_str()).collect();
            l1_docs.push(doc(&format!("a{i}"), &refs1, "en"));
            l2_docs.push(doc(&format!("b{i}"), &refs2, "de"));
            pairs.push((tokens, renamed));
        }
        let parallel = ParallelCorpus::new(pairs, ("en".into(), "de".into())).unwrap();
        (l1_docs, l2_docs, parallel)
    }

    fn toy_config() -> BilingualTrainConfig {
        BilingualTrainConfig {
            dim: 25,
            window: 5,
            min_count: 2,
            lambda: 1.0,
            epochs: 20,
            learning_rate: 0.025,
            negative_samples: 5,
            seed: 42,
            left_only: false,
        }
    }

    #[test]
    fn lambda_zero_is_bit_identical_to_monolingual_runs() {
        let (l1_docs, l2_docs, parallel) = toy_corpora(80, 7);
        let mut config = toy_config();
        config.lambda = 0.0;
        config.epochs = 3;
        let (j1, j2, report) =
            train_bilingual(&l1_docs, &l2_docs, &parallel, &config).unwrap();
        let (m1, _) =
            train_monolingual(&l1_docs, "en", Collection::News, &config, config.seed).unwrap();
        let (m2, _) = train_monolingual(
            &l2_docs,
            "de",
            Collection::News,
            &config,
            config.seed.wrapping_add(1),
        )
        .unwrap();
        assert_eq!(j1.tokens(), m1.tokens());
        assert_eq!(j2.tokens(), m2.tokens());
        for (a, b) in j1.matrix().iter().zip(m1.matrix().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in j2.matrix().iter().zip(m2.matrix().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(report.regularizer_loss.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn training_is_deterministic_for_fixed_seed() {
        let (l1_docs, l2_docs, parallel) = toy_corpora(40, 11);
        let mut config = toy_config();
        config.epochs = 2;
        let (a1, a2, _) = train_bilingual(&l1_docs, &l2_docs, &parallel, &config).unwrap();
        let (b1, b2, _) = train_bilingual(&l1_docs, &l2_docs, &parallel, &config).unwrap();
        for (x, y) in a1.matrix().iter().zip(b1.matrix().iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in a2.matrix().iter().zip(b2.matrix().iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn empty_corpus_is_empty_vocabulary() {
        let (_, l2_docs, parallel) = toy_corpora(10, 3);
        let config = toy_config();
        let err = train_bilingual(&[], &l2_docs, &parallel, &config).unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary { .. }), "{err}");
    }

    #[test]
    fn mean_epoch_loss_is_non_increasing_early() {
        let (l1_docs, _, _) = toy_corpora(120, 19);
        let mut config = toy_config();
        config.epochs = 5;
        let (_, losses) =
            train_monolingual(&l1_docs, "en", Collection::News, &config, 9).unwrap();
        assert_eq!(losses.len(), 5);
        for w in losses.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-9,
                "epoch loss increased: {:?}",
                losses
            );
        }
    }

    #[test]
    fn left_only_window_restricts_context() {
        let (l1_docs, _, _) = toy_corpora(30, 23);
        let mut config = toy_config();
        config.epochs = 1;
        config.dim = 8;
        let (sym, _) =
            train_monolingual(&l1_docs, "en", Collection::News, &config, 3).unwrap();
        config.left_only = true;
        let (left, _) =
            train_monolingual(&l1_docs, "en", Collection::News, &config, 3).unwrap();
        assert_eq!(sym.tokens(), left.tokens());
        // Half the context pairs disappear, so the trained weights differ.
        assert!(sym
            .matrix()
            .iter()
            .zip(left.matrix().iter())
            .any(|(a, b)| a != b));
    }

    #[test]
    fn vocabulary_respects_min_count_and_frequency_order() {
        let docs = vec![
            doc("d0", &["b", "b", "a", "c"], "en"),
            doc("d1", &["b", "a", "rare"], "en"),
        ];
        let config = BilingualTrainConfig {
            dim: 4,
            min_count: 2,
            epochs: 1,
            ..Default::default()
        };
        let (set, _) = train_monolingual(&docs, "en", Collection::News, &config, 1).unwrap();
        // b: 3, a: 2, c: 1 (dropped), rare: 1 (dropped).
        assert_eq!(set.tokens(), ["b", "a"]);
    }

    #[test]
    fn parallel_corpus_from_files_aligns_lines() {
        use std::io::Write as _;
        let mut fa = tempfile::NamedTempFile::new().unwrap();
        let mut fb = tempfile::NamedTempFile::new().unwrap();
        writeln!(fa, "Hello world\n\nSecond line").unwrap();
        writeln!(fb, "Hallo Welt\n\nZweite Zeile").unwrap();
        let corpus = ParallelCorpus::from_files(
            fa.path(),
            fb.path(),
            ("en".to_string(), "de".to_string()),
        )
        .unwrap();
        // The empty middle pair is dropped.
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.pairs()[0].0, ["hello", "world"]);
        assert_eq!(corpus.pairs()[0].1, ["hallo", "welt"]);
    }

    #[test]
    fn parallel_corpus_line_count_mismatch() {
        use std::io::Write as _;
        let mut fa = tempfile::NamedTempFile::new().unwrap();
        let mut fb = tempfile::NamedTempFile::new().unwrap();
        writeln!(fa, "one\ntwo").unwrap();
        writeln!(fb, "eins").unwrap();
        assert!(matches!(
            ParallelCorpus::from_files(fa.path(), fb.path(), ("en".into(), "de".into())),
            Err(Error::LineCountMismatch { .. })
        ));
    }
}
