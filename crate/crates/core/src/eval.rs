//! Pairwise tweet-news similarity scoring, relevance classification, gold
//! judgment handling, and statistical evaluation.
//!
//! Gold judgments use the 0/1/2 scale (dissimilar / related / similar);
//! aggregated scores may be fractional after averaging across annotators.
//! Correlation against gold uses the Pearson product-moment coefficient;
//! annotator agreement uses tie-corrected Kendall tau-b, since 3-level
//! scales guarantee ties. The relevance classifier is a linear soft-margin
//! hinge-loss model trained by stochastic subgradient descent over
//! concatenated `[tweet_vec, news_vec]` pair features.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::align::{self, AlignmentModel, Direction};
use crate::embedding::EmbeddingSet;
use crate::text::{self, doc_embedding, tf_idf, DocKind, Document};
use crate::util::{atomic_write, read_to_string};

#[derive(Debug, Error)]
pub enum Error {
    #[error("ZeroVector: cosine is undefined for a zero vector")]
    ZeroVector,
    #[error("LengthMismatch: {left} vs {right} values")]
    LengthMismatch { left: usize, right: usize },
    #[error("TooFewSamples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("ZeroVariance: an input has no variance")]
    ZeroVariance,
    #[error("AllTied: every pair is tied in one of the inputs")]
    AllTied,
    #[error("RaggedRatings: annotator {annotator} rated {got} pairs, expected {expected}")]
    RaggedRatings {
        annotator: usize,
        got: usize,
        expected: usize,
    },
    #[error("InvalidScore: {score} (annotator scores must be 0, 1, or 2)")]
    InvalidScore { score: f64 },
    #[error("SingleClass: training data must contain both classes")]
    SingleClass,
    #[error("DimMismatch: feature has {got} dimensions, expected {expected}")]
    DimMismatch { expected: usize, got: usize },
    #[error("UnresolvedId: {kind} id {id:?} not found in the corpus")]
    UnresolvedId { kind: &'static str, id: String },
    #[error("DuplicateDocumentId: {id:?} appears more than once in the {kind} corpus")]
    DuplicateDocumentId { kind: &'static str, id: String },
    #[error("GoldParse: {path}: line {line}: {message}")]
    GoldParse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Text(#[from] text::Error),
    #[error(transparent)]
    Align(#[from] align::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Cosine similarity clamped to [-1, 1] against rounding.
pub fn cosine(u: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let nu = u.dot(&u).sqrt();
    let nv = v.dot(&v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((u.dot(&v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// A (tweet, news) pair with its gold similarity score on the 0-2 scale.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgmentRecord {
    pub tweet_id: String,
    pub news_id: String,
    pub tweet_lang: String,
    pub news_lang: String,
    pub score: f64,
}

impl JudgmentRecord {
    pub fn new(
        tweet_id: impl Into<String>,
        news_id: impl Into<String>,
        tweet_lang: impl Into<String>,
        news_lang: impl Into<String>,
        score: f64,
    ) -> Result<Self> {
        if !(0.0..=2.0).contains(&score) {
            return Err(Error::InvalidScore { score });
        }
        Ok(Self {
            tweet_id: tweet_id.into(),
            news_id: news_id.into(),
            tweet_lang: tweet_lang.into(),
            news_lang: news_lang.into(),
            score,
        })
    }
}

/// Identity of a judged pair, used when aggregating per-annotator ratings.
#[derive(Debug, Clone)]
pub struct PairKey {
    pub tweet_id: String,
    pub news_id: String,
    pub tweet_lang: String,
    pub news_lang: String,
}

/// Arithmetic mean across annotators, one score column per pair.
/// `ratings[a][i]` is annotator `a`'s score for pair `i`.
pub fn aggregate_judgments(
    pairs: &[PairKey],
    ratings: &[Vec<f64>],
) -> Result<Vec<JudgmentRecord>> {
    if ratings.is_empty() {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    for (annotator, scores) in ratings.iter().enumerate() {
        if scores.len() != pairs.len() {
            return Err(Error::RaggedRatings {
                annotator,
                got: scores.len(),
                expected: pairs.len(),
            });
        }
        for &s in scores {
            if s != 0.0 && s != 1.0 && s != 2.0 {
                return Err(Error::InvalidScore { score: s });
            }
        }
    }
    pairs
        .iter()
        .enumerate()
        .map(|(i, key)| {
            let sum: f64 = ratings.iter().map(|r| r[i]).sum();
            JudgmentRecord::new(
                key.tweet_id.clone(),
                key.news_id.clone(),
                key.tweet_lang.clone(),
                key.news_lang.clone(),
                sum / ratings.len() as f64,
            )
        })
        .collect()
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::TooFewSamples {
            need: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Kendall tau-b, tie-corrected: `(C - D) / sqrt((n0 - n1)(n0 - n2))`.
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    let mut ties_x = 0u64;
    let mut ties_y = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = xs[i] - xs[j];
            let dy = ys[i] - ys[j];
            let tie_x = dx == 0.0;
            let tie_y = dy == 0.0;
            if tie_x {
                ties_x += 1;
            }
            if tie_y {
                ties_y += 1;
            }
            if !tie_x && !tie_y {
                if (dx > 0.0) == (dy > 0.0) {
                    concordant += 1;
                } else {
                    discordant += 1;
                }
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let denom = ((n0 - ties_x as f64) * (n0 - ties_y as f64)).sqrt();
    if denom == 0.0 {
        return Err(Error::AllTied);
    }
    Ok(((concordant as f64 - discordant as f64) / denom).clamp(-1.0, 1.0))
}

/// Binary relevance outcome of the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relevance {
    Relevant,
    Irrelevant,
}

/// Settings for the hinge-loss classifier.
#[derive(Debug, Clone)]
pub struct ClassifierConfig {
    /// L2 regularization strength.
    pub lambda: f64,
    /// Passes over the training data.
    pub epochs: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 200,
            seed: 1,
        }
    }
}

/// Linear soft-margin classifier with an augmented bias weight.
#[derive(Debug, Clone)]
pub struct LinearClassifier {
    weights: Array1<f64>, // length dim + 1; last entry is the bias
    dim: usize,
}

impl LinearClassifier {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Signed decision value `w . [x, 1]`.
    pub fn decision(&self, feature: ArrayView1<'_, f64>) -> Result<f64> {
        if feature.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: feature.len(),
            });
        }
        let mut value = self.weights[self.dim];
        for (w, x) in self.weights.iter().zip(feature.iter()) {
            value += w * x;
        }
        Ok(value)
    }

    pub fn predict(&self, feature: ArrayView1<'_, f64>) -> Result<Relevance> {
        Ok(if self.decision(feature)? >= 0.0 {
            Relevance::Relevant
        } else {
            Relevance::Irrelevant
        })
    }
}

/// Trains the linear hinge-loss model by stochastic subgradient descent
/// with step size `1 / (lambda * t)`.
///
/// Examples are first brought into a canonical order (sorted by feature
/// values, then label) before the seeded per-epoch shuffles, so the fitted
/// model is bitwise invariant to the order the caller supplies examples in.
pub fn train_relevance_classifier(
    features: ArrayView2<'_, f64>,
    labels: &[bool],
    config: &ClassifierConfig,
) -> Result<LinearClassifier> {
    if features.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.nrows(),
            right: labels.len(),
        });
    }
    let n = labels.len();
    if n < 2
        || labels.iter().all(|&l| l)
        || labels.iter().all(|&l| !l)
    {
        return Err(Error::SingleClass);
    }
    let dim = features.ncols();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ra = features.row(a);
        let rb = features.row(b);
        for (x, y) in ra.iter().zip(rb.iter()) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        labels[a].cmp(&labels[b])
    });

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights = Array1::<f64>::zeros(dim + 1);
    let mut t = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (config.lambda * t as f64);
            let y = if labels[i] { 1.0 } else { -1.0 };
            let row = features.row(i);
            let mut margin = weights[dim];
            for (w, x) in weights.iter().zip(row.iter()) {
                margin += w * x;
            }
            margin *= y;
            let shrink = 1.0 - eta * config.lambda;
            weights *= shrink;
            if margin < 1.0 {
                for (w, x) in weights.iter_mut().zip(row.iter()) {
                    *w += eta * y * x;
                }
                weights[dim] += eta * y;
            }
        }
    }
    Ok(LinearClassifier { weights, dim })
}

/// Which side of the pair an alignment model was applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformMode {
    None,
    T2N,
    N2T,
}

impl std::fmt::Display for TransformMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransformMode::None => write!(f, "none"),
            TransformMode::T2N => write!(f, "t2n"),
            TransformMode::N2T => write!(f, "n2t"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Treat gold scores as binary labels (>= 1 is relevant) and report
    /// k-fold classifier accuracy in addition to the correlation.
    pub binary: bool,
    pub folds: usize,
    pub seed: u64,
    pub classifier: ClassifierConfig,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            binary: false,
            folds: 5,
            seed: 1,
            classifier: ClassifierConfig::default(),
        }
    }
}

/// One scored pair in the evaluation output.
#[derive(Debug, Clone)]
pub struct PairScore {
    pub tweet_id: String,
    pub news_id: String,
    pub tweet_lang: String,
    pub news_lang: String,
    pub predicted: f64,
    pub gold: f64,
}

/// Per language-pair correlation breakdown.
#[derive(Debug, Clone)]
pub struct LangPairStats {
    pub tweet_lang: String,
    pub news_lang: String,
    pub n_pairs: usize,
    pub pearson_r: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub pearson_r: f64,
    pub n_pairs: usize,
    pub skipped: usize,
    pub breakdown: Vec<LangPairStats>,
    pub accuracy: Option<f64>,
    pub dim: usize,
    pub transform: TransformMode,
    pub per_pair: Vec<PairScore>,
}

/// Scores every gold pair by the cosine of its tf-idf weighted document
/// embeddings (the alignment model, when given, is applied to its fitted
/// side first) and correlates the predictions with the gold scores.
///
/// Pairs whose documents have no representable tokens (or a zero document
/// vector) are skipped and counted, so results stay auditable. With
/// `opts.binary` the report additionally carries seeded k-fold accuracy of
/// the relevance classifier on `[tweet_vec, news_vec]` features.
pub fn evaluate_dataset(
    gold: &[JudgmentRecord],
    tweet_docs: &[Document],
    news_docs: &[Document],
    tweet_set: &EmbeddingSet,
    news_set: &EmbeddingSet,
    model: Option<&AlignmentModel>,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let transform = match model.map(|m| m.direction()) {
        None => TransformMode::None,
        Some(Direction::T2N) => TransformMode::T2N,
        Some(Direction::N2T) => TransformMode::N2T,
    };
    let (tweet_space, news_space) = match (model, transform) {
        (Some(m), TransformMode::T2N) => (Some(align::apply_alignment(m, tweet_set)?), None),
        (Some(m), TransformMode::N2T) => (None, Some(align::apply_alignment(m, news_set)?)),
        _ => (None, None),
    };
    let tweet_space = tweet_space.as_ref().unwrap_or(tweet_set);
    let news_space = news_space.as_ref().unwrap_or(news_set);

    let index_docs = |docs: &'_ [Document],
                      kind: &'static str|
     -> Result<HashMap<String, usize>> {
        let mut map = HashMap::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            if map.insert(doc.id.clone(), i).is_some() {
                return Err(Error::DuplicateDocumentId {
                    kind,
                    id: doc.id.clone(),
                });
            }
        }
        Ok(map)
    };
    let tweet_index = index_docs(tweet_docs, "tweet")?;
    let news_index = index_docs(news_docs, "news")?;

    // idf statistics are per collection.
    let tweet_weights = tf_idf(tweet_docs)?;
    let news_weights = tf_idf(news_docs)?;

    let mut per_pair = Vec::with_capacity(gold.len());
    let mut features: Vec<(Array1<f64>, Array1<f64>)> = Vec::new();
    let mut skipped = 0usize;
    for record in gold {
        let tweet_doc = tweet_index
            .get(&record.tweet_id)
            .map(|&i| &tweet_docs[i])
            .ok_or_else(|| Error::UnresolvedId {
                kind: "tweet",
                id: record.tweet_id.clone(),
            })?;
        let news_doc = news_index
            .get(&record.news_id)
            .map(|&i| &news_docs[i])
            .ok_or_else(|| Error::UnresolvedId {
                kind: "news",
                id: record.news_id.clone(),
            })?;

        let embedded = doc_embedding(tweet_doc, tweet_space, &tweet_weights)
            .and_then(|(tv, _)| {
                doc_embedding(news_doc, news_space, &news_weights).map(|(nv, _)| (tv, nv))
            });
        let (tweet_vec, news_vec) = match embedded {
            Ok(pair) => pair,
            Err(
                text::Error::NoRepresentableTokens { .. } | text::Error::DroppedDocument { .. },
            ) => {
                skipped += 1;
                continue;
            }
            Err(other) => return Err(other.into()),
        };
        let predicted = match cosine(tweet_vec.view(), news_vec.view()) {
            Ok(value) => value,
            Err(Error::ZeroVector) => {
                skipped += 1;
                continue;
            }
            Err(other) => return Err(other),
        };
        per_pair.push(PairScore {
            tweet_id: record.tweet_id.clone(),
            news_id: record.news_id.clone(),
            tweet_lang: record.tweet_lang.clone(),
            news_lang: record.news_lang.clone(),
            predicted,
            gold: record.score,
        });
        if opts.binary {
            features.push((tweet_vec, news_vec));
        }
    }

    if per_pair.len() < 2 {
        return Err(Error::TooFewSamples {
            need: 2,
            got: per_pair.len(),
        });
    }
    let predicted: Vec<f64> = per_pair.iter().map(|p| p.predicted).collect();
    let gold_scores: Vec<f64> = per_pair.iter().map(|p| p.gold).collect();
    let pearson_r = pearson(&predicted, &gold_scores)?;

    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, pair) in per_pair.iter().enumerate() {
        groups
            .entry((pair.tweet_lang.clone(), pair.news_lang.clone()))
            .or_default()
            .push(i);
    }
    let breakdown = groups
        .into_iter()
        .map(|((tweet_lang, news_lang), ids)| {
            let xs: Vec<f64> = ids.iter().map(|&i| per_pair[i].predicted).collect();
            let ys: Vec<f64> = ids.iter().map(|&i| per_pair[i].gold).collect();
            LangPairStats {
                tweet_lang,
                news_lang,
                n_pairs: ids.len(),
                pearson_r: pearson(&xs, &ys).ok(),
            }
        })
        .collect();

    let accuracy = if opts.binary {
        Some(cross_validated_accuracy(
            &features,
            &gold_scores,
            opts,
        )?)
    } else {
        None
    };

    Ok(EvalReport {
        pearson_r,
        n_pairs: per_pair.len(),
        skipped,
        breakdown,
        accuracy,
        dim: tweet_set.dim(),
        transform,
        per_pair,
    })
}

fn cross_validated_accuracy(
    features: &[(Array1<f64>, Array1<f64>)],
    gold_scores: &[f64],
    opts: &EvalOptions,
) -> Result<f64> {
    let n = features.len();
    let folds = opts.folds.min(n);
    if folds < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let dim = 2 * features[0].0.len();
    let mut matrix = Array2::<f64>::zeros((n, dim));
    for (i, (tv, nv)) in features.iter().enumerate() {
        let mut row = matrix.row_mut(i);
        for (j, v) in tv.iter().chain(nv.iter()).enumerate() {
            row[j] = *v;
        }
    }
    let labels: Vec<bool> = gold_scores.iter().map(|&s| s >= 1.0).collect();

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    order.shuffle(&mut rng);

    let mut fold_accuracies = Vec::with_capacity(folds);
    for fold in 0..folds {
        let test: Vec<usize> = order
            .iter()
            .copied()
            .skip(fold)
            .step_by(folds)
            .collect();
        let train: Vec<usize> = order
            .iter()
            .copied()
            .filter(|i| !test.contains(i))
            .collect();
        let train_matrix = take_rows(&matrix, &train);
        let train_labels: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
        let model =
            train_relevance_classifier(train_matrix.view(), &train_labels, &opts.classifier)?;
        let mut correct = 0usize;
        for &i in &test {
            let got = model.predict(matrix.row(i))? == Relevance::Relevant;
            if got == labels[i] {
                correct += 1;
            }
        }
        fold_accuracies.push(correct as f64 / test.len() as f64);
    }
    Ok(fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64)
}

fn take_rows(matrix: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), matrix.ncols()));
    for (new_i, &old_i) in rows.iter().enumerate() {
        out.row_mut(new_i).assign(&matrix.row(old_i));
    }
    out
}

/// Reads the gold TSV: a header line, then
/// `tweet_id<TAB>news_id<TAB>tweet_lang<TAB>news_lang<TAB>score`.
pub fn read_gold(path: impl AsRef<Path>) -> Result<Vec<JudgmentRecord>> {
    let path = path.as_ref();
    let content = read_to_string(path)?;
    let err = |line: usize, message: String| Error::GoldParse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let expect = "tweet_id\tnews_id\ttweet_lang\tnews_lang\tscore";
    if header.trim_end() != expect {
        return Err(err(1, format!("bad header (expected {expect:?})")));
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(err(line_no, format!("expected 5 columns, got {}", fields.len())));
        }
        let score: f64 = fields[4]
            .trim()
            .parse()
            .map_err(|_| err(line_no, format!("bad score {:?}", fields[4])))?;
        let record = JudgmentRecord::new(fields[0], fields[1], fields[2], fields[3], score)
            .map_err(|e| err(line_no, e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_gold(records: &[JudgmentRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("tweet_id\tnews_id\ttweet_lang\tnews_lang\tscore\n");
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.tweet_id, r.news_id, r.tweet_lang, r.news_lang, r.score
        );
    }
    let path = path.as_ref();
    atomic_write(path, out.as_bytes())
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Structured key-value rendering of an [`EvalReport`].
pub fn report_to_string(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "pearson_r {:.6}", report.pearson_r);
    let _ = writeln!(out, "n_pairs {}", report.n_pairs);
    let _ = writeln!(out, "skipped {}", report.skipped);
    let _ = writeln!(out, "dim {}", report.dim);
    let _ = writeln!(out, "transform {}", report.transform);
    if let Some(acc) = report.accuracy {
        let _ = writeln!(out, "accuracy {acc:.6}");
    }
    for group in &report.breakdown {
        match group.pearson_r {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "pair {}-{} n {} pearson_r {:.6}",
                    group.tweet_lang, group.news_lang, group.n_pairs, r
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "pair {}-{} n {} pearson_r NA",
                    group.tweet_lang, group.news_lang, group.n_pairs
                );
            }
        }
    }
    out
}

/// Per-pair TSV rendering (for dimension-sweep style plots).
pub fn per_pair_tsv(report: &EvalReport) -> String {
    let mut out = String::from("tweet_id\tnews_id\ttweet_lang\tnews_lang\tpredicted\tgold\n");
    for p in &report.per_pair {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.6}\t{}",
            p.tweet_id, p.news_id, p.tweet_lang, p.news_lang, p.predicted, p.gold
        );
    }
    out
}

/// Builds the documents needed by [`evaluate_dataset`] out of raw corpora,
/// dropping nothing; convenience for the CLI and tests.
pub fn documents_of_kind(docs: &[Document], kind: DocKind) -> Vec<Document> {
    docs.iter().filter(|d| d.kind == kind).cloned().collect()
}
