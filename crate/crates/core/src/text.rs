//! Preprocessing of tweets and news articles into token sequences, and
//! tf-idf weighted document embeddings.
//!
//! Tweet cleanup: retweets (a leading `RT @`) are flagged as dropped, URLs
//! (`http://` or `https://` up to the next whitespace) and user mentions
//! (`@` plus word characters) are removed, and `#` characters are deleted
//! while the hashtag word is kept. Both kinds are then lowercased and split
//! on non-alphanumeric boundaries (Unicode letters and digits survive,
//! umlauts included).

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::LazyLock;

use ndarray::Array1;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingSet;
use crate::util::{atomic_write, read_to_string};

#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptyCorpus: no usable documents")]
    EmptyCorpus,
    #[error("NoRepresentableTokens: document {id:?} has no in-vocabulary tokens")]
    NoRepresentableTokens { id: String },
    #[error("DroppedDocument: document {id:?} was filtered out during preprocessing")]
    DroppedDocument { id: String },
    #[error("DuplicateDocumentId: {id:?} appears more than once")]
    DuplicateDocumentId { id: String },
    #[error("InvalidKind: {kind:?} at line {line} (expected tweet|news)")]
    InvalidKind { line: usize, kind: String },
    #[error("Json: line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Document source kind; mirrors [`crate::embedding::Collection`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DocKind {
    Tweet,
    News,
}

impl std::fmt::Display for DocKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DocKind::Tweet => write!(f, "tweet"),
            DocKind::News => write!(f, "news"),
        }
    }
}

impl std::str::FromStr for DocKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tweet" => Ok(DocKind::Tweet),
            "news" => Ok(DocKind::News),
            other => Err(format!("unknown kind {other:?} (expected tweet|news)")),
        }
    }
}

/// A preprocessed document. `dropped` marks documents excluded from
/// downstream corpora (retweets); it is a flag, not an error.
#[derive(Debug, Clone)]
pub struct Document {
    pub id: String,
    pub language: String,
    pub kind: DocKind,
    pub raw: String,
    pub tokens: Vec<String>,
    pub dropped: bool,
}

static URL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"https?://\S*").expect("static pattern"));
static MENTION_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").expect("static pattern"));

/// Cleans and tokenizes one raw text into a [`Document`].
pub fn preprocess(raw: &str, kind: DocKind, language: &str, id: &str) -> Document {
    let mut dropped = false;
    let mut text = raw.to_string();
    if kind == DocKind::Tweet {
        if raw.trim_start().starts_with("RT @") {
            dropped = true;
        }
        let no_urls = URL_RE.replace_all(&text, " ");
        let no_mentions = MENTION_RE.replace_all(&no_urls, " ");
        text = no_mentions.replace('#', "");
    }
    let tokens = tokenize(&text);
    Document {
        id: id.to_string(),
        language: language.to_string(),
        kind,
        raw: raw.to_string(),
        tokens,
        dropped,
    }
}

/// Lowercases and splits on any non-alphanumeric boundary, discarding
/// empty fragments.
fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Corpus-level tf-idf statistics plus the per-document weight maps.
///
/// `idf(w) = ln((1 + N) / (1 + df(w))) + 1`, smoothed so unseen tokens get
/// a finite (maximal) weight and ubiquitous tokens keep a nonzero one.
#[derive(Debug, Clone)]
pub struct WeightedVocabulary {
    n_docs: usize,
    df: BTreeMap<String, usize>,
    per_doc: BTreeMap<String, BTreeMap<String, f64>>,
}

impl WeightedVocabulary {
    pub fn doc_count(&self) -> usize {
        self.n_docs
    }

    pub fn document_frequency(&self, token: &str) -> usize {
        self.df.get(token).copied().unwrap_or(0)
    }

    pub fn idf(&self, token: &str) -> f64 {
        let df = self.document_frequency(token);
        ((1 + self.n_docs) as f64 / (1 + df) as f64).ln() + 1.0
    }

    /// tf-idf weight of `token` within the corpus document `doc_id`.
    pub fn weight(&self, doc_id: &str, token: &str) -> Option<f64> {
        self.per_doc.get(doc_id)?.get(token).copied()
    }

    pub fn doc_weights(&self, doc_id: &str) -> Option<&BTreeMap<String, f64>> {
        self.per_doc.get(doc_id)
    }
}

/// Computes tf-idf over the non-dropped documents of a corpus.
/// tf is the raw in-document count.
pub fn tf_idf(corpus: &[Document]) -> Result<WeightedVocabulary> {
    let live: Vec<&Document> = corpus.iter().filter(|d| !d.dropped).collect();
    if live.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n_docs = live.len();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let mut tf_maps: Vec<BTreeMap<String, usize>> = Vec::with_capacity(n_docs);
    for doc in &live {
        let mut tf: BTreeMap<String, usize> = BTreeMap::new();
        for token in &doc.tokens {
            match tf.entry(token.clone()) {
                Entry::Vacant(e) => {
                    e.insert(1);
                    *df.entry(token.clone()).or_insert(0) += 1;
                }
                Entry::Occupied(mut e) => *e.get_mut() += 1,
            }
        }
        tf_maps.push(tf);
    }

    let mut per_doc = BTreeMap::new();
    for (doc, tf) in live.iter().zip(tf_maps) {
        let weights: BTreeMap<String, f64> = tf
            .into_iter()
            .map(|(token, count)| {
                let idf = ((1 + n_docs) as f64 / (1 + df[&token]) as f64).ln() + 1.0;
                (token, count as f64 * idf)
            })
            .collect();
        if per_doc.insert(doc.id.clone(), weights).is_some() {
            return Err(Error::DuplicateDocumentId {
                id: doc.id.clone(),
            });
        }
    }
    Ok(WeightedVocabulary {
        n_docs,
        df,
        per_doc,
    })
}

/// tf-idf weighted average of the document's in-vocabulary word vectors,
/// plus the in-vocabulary token fraction. OOV tokens are skipped; a
/// document with none left is an error.
pub fn doc_embedding(
    doc: &Document,
    set: &EmbeddingSet,
    weights: &WeightedVocabulary,
) -> Result<(Array1<f64>, f64)> {
    if doc.dropped {
        return Err(Error::DroppedDocument {
            id: doc.id.clone(),
        });
    }
    let mut acc = Array1::<f64>::zeros(set.dim());
    let mut weight_sum = 0.0;
    let mut in_vocab = 0usize;
    for token in &doc.tokens {
        if let Some(vec) = set.lookup(token) {
            // Per-occurrence idf accumulation; summed over a token's
            // occurrences this equals tf * idf.
            let w = weights.idf(token);
            acc.scaled_add(w, &vec);
            weight_sum += w;
            in_vocab += 1;
        }
    }
    if in_vocab == 0 {
        return Err(Error::NoRepresentableTokens {
            id: doc.id.clone(),
        });
    }
    acc /= weight_sum;
    let coverage = in_vocab as f64 / doc.tokens.len() as f64;
    Ok((acc, coverage))
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    lang: String,
    kind: String,
}

/// Reads a JSON-Lines corpus (`{"id", "text", "lang", "kind"}`) and
/// preprocesses every record. Dropped documents are kept in the result with
/// their flag set so callers can count them.
pub fn read_corpus_jsonl(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let content = read_to_string(path)?;
    let mut docs = Vec::new();
    for (line_no, line) in content.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord =
            serde_json::from_str(line).map_err(|source| Error::Json {
                line: line_no,
                source,
            })?;
        let kind: DocKind = record.kind.parse().map_err(|_| Error::InvalidKind {
            line: line_no,
            kind: record.kind.clone(),
        })?;
        docs.push(preprocess(&record.text, kind, &record.lang, &record.id));
    }
    Ok(docs)
}

/// Writes the token dump TSV (`id<TAB>space-joined tokens`), excluding
/// dropped documents.
pub fn write_token_dump(docs: &[Document], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for doc in docs.iter().filter(|d| !d.dropped) {
        let _ = write!(out, "{}\t", doc.id);
        out.push_str(&doc.tokens.join(" "));
        out.push('\n');
    }
    let path = path.as_ref();
    atomic_write(path, out.as_bytes())
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
