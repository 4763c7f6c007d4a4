//! Reading, writing, and vocabulary bookkeeping for word embedding sets in
//! the plain-text interchange format.
//!
//! Each nonempty line of an embedding file is a token followed by `d`
//! whitespace-separated decimal values; `d` must be constant across lines.
//! A first line of exactly two integers (`n d`) is tolerated and skipped
//! for compatibility with the dims-header variant of the format. Line order
//! is kept as token rank order and is interpreted as descending corpus
//! frequency; a sidecar count file (`token<TAB>count`) can override that
//! assumption via [`EmbeddingSet::reranked_by_counts`].

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView1, ArrayView2};
use thiserror::Error;

use crate::util::{atomic_write, read_to_string};

#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptyInput: no data lines in {path}")]
    EmptyInput { path: PathBuf },
    #[error("DimensionMismatch: line {line} has {found} values, expected {expected}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("DuplicateToken: token {token:?} appears more than once")]
    DuplicateToken { token: String },
    #[error("NonFiniteValue: non-finite value at line {line}")]
    NonFiniteValue { line: usize },
    #[error("InvalidNumber: cannot parse {text:?} at line {line}")]
    InvalidNumber { line: usize, text: String },
    #[error("InvalidShape: {0}")]
    InvalidShape(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Which collection an embedding set was trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Collection {
    Tweet,
    News,
}

impl std::fmt::Display for Collection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Collection::Tweet => write!(f, "tweet"),
            Collection::News => write!(f, "news"),
        }
    }
}

impl std::str::FromStr for Collection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tweet" => Ok(Collection::Tweet),
            "news" => Ok(Collection::News),
            other => Err(format!("unknown collection {other:?} (expected tweet|news)")),
        }
    }
}

/// An ordered vocabulary with its `n x d` embedding matrix, tagged by
/// language and collection. Immutable after construction; token rank order
/// is the row order.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Array2<f64>,
    language: String,
    collection: Collection,
    transformed: bool,
}

impl EmbeddingSet {
    /// Builds a set from a token list and matrix, validating the invariants:
    /// one row per token, unique tokens, finite entries, `d >= 1`.
    pub fn new(
        tokens: Vec<String>,
        matrix: Array2<f64>,
        language: impl Into<String>,
        collection: Collection,
    ) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidShape("token list is empty".into()));
        }
        if matrix.nrows() != tokens.len() {
            return Err(Error::InvalidShape(format!(
                "matrix has {} rows for {} tokens",
                matrix.nrows(),
                tokens.len()
            )));
        }
        if matrix.ncols() == 0 {
            return Err(Error::InvalidShape("embedding dimension is zero".into()));
        }
        if let Some(row) = matrix
            .rows()
            .into_iter()
            .position(|r| r.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFiniteValue { line: row + 1 });
        }
        let index = build_index(&tokens)?;
        Ok(Self {
            tokens,
            index,
            matrix,
            language: language.into(),
            collection,
            transformed: false,
        })
    }

    /// Constructor for internal use where the invariants hold by
    /// construction (e.g. applying a finite linear map to a valid set).
    pub(crate) fn from_parts_unchecked(
        tokens: Vec<String>,
        index: HashMap<String, usize>,
        matrix: Array2<f64>,
        language: String,
        collection: Collection,
        transformed: bool,
    ) -> Self {
        Self {
            tokens,
            index,
            matrix,
            language,
            collection,
            transformed,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn collection(&self) -> Collection {
        self.collection
    }

    /// True when the set came out of an alignment transform rather than a
    /// file or a trainer.
    pub fn is_transformed(&self) -> bool {
        self.transformed
    }

    /// Rank of a token (its row number), if present.
    pub fn rank(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Row vector for `token`; absence is not an error.
    pub fn lookup(&self, token: &str) -> Option<ArrayView1<'_, f64>> {
        self.index.get(token).map(|&i| self.matrix.row(i))
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.matrix.row(i)
    }

    /// Returns a copy of the set with rows reordered by descending count,
    /// ties broken by the current rank. Tokens missing from `counts` are
    /// treated as count 0.
    pub fn reranked_by_counts(&self, counts: &HashMap<String, u64>) -> Self {
        let mut order: Vec<usize> = (0..self.tokens.len()).collect();
        order.sort_by_key(|&i| {
            (
                std::cmp::Reverse(counts.get(&self.tokens[i]).copied().unwrap_or(0)),
                i,
            )
        });
        let tokens: Vec<String> = order.iter().map(|&i| self.tokens[i].clone()).collect();
        let mut matrix = Array2::zeros((self.tokens.len(), self.dim()));
        for (new_row, &old_row) in order.iter().enumerate() {
            matrix.row_mut(new_row).assign(&self.matrix.row(old_row));
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            tokens,
            index,
            matrix,
            language: self.language.clone(),
            collection: self.collection,
            transformed: self.transformed,
        }
    }
}

fn build_index(tokens: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(tokens.len());
    for (i, token) in tokens.iter().enumerate() {
        if index.insert(token.clone(), i).is_some() {
            return Err(Error::DuplicateToken {
                token: token.clone(),
            });
        }
    }
    Ok(index)
}

/// Loads an embedding set from the plain-text format, preserving file line
/// order as token rank order.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    language: impl Into<String>,
    collection: Collection,
) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let content = read_to_string(path)?;
    parse_embeddings(&content, path, language, collection)
}

fn parse_embeddings(
    content: &str,
    path: &Path,
    language: impl Into<String>,
    collection: Collection,
) -> Result<EmbeddingSet> {
    let mut tokens: Vec<String> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut dim: Option<usize> = None;
    let mut seen_first_data_line = false;

    for (line_no, line) in content.lines().enumerate() {
        let line_no = line_no + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue; // blank line
        };
        let rest: Vec<&str> = fields.collect();

        // Tolerate a dims header ("n d") as the very first data-bearing line.
        if !seen_first_data_line {
            seen_first_data_line = true;
            if rest.len() == 1 && is_integer(token) && is_integer(rest[0]) {
                continue;
            }
        }

        match dim {
            None => {
                if rest.is_empty() {
                    return Err(Error::DimensionMismatch {
                        line: line_no,
                        expected: 1,
                        found: 0,
                    });
                }
                dim = Some(rest.len());
            }
            Some(d) => {
                if rest.len() != d {
                    return Err(Error::DimensionMismatch {
                        line: line_no,
                        expected: d,
                        found: rest.len(),
                    });
                }
            }
        }

        for field in &rest {
            let v: f64 = field.parse().map_err(|_| Error::InvalidNumber {
                line: line_no,
                text: (*field).to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { line: line_no });
            }
            values.push(v);
        }
        tokens.push(token.to_string());
    }

    let Some(dim) = dim else {
        return Err(Error::EmptyInput {
            path: path.to_path_buf(),
        });
    };
    let matrix = Array2::from_shape_vec((tokens.len(), dim), values)
        .expect("row count and dim are consistent by construction");
    let index = build_index(&tokens)?;
    Ok(EmbeddingSet {
        tokens,
        index,
        matrix,
        language: language.into(),
        collection,
        transformed: false,
    })
}

fn is_integer(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Writes a set in the plain-text format. Values are printed with Rust's
/// shortest-roundtrip decimal formatting, so a reload reproduces them
/// exactly and a second save is byte-identical.
pub fn save_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for (token, row) in set.tokens.iter().zip(set.matrix.rows()) {
        out.push_str(token);
        for v in row.iter() {
            write!(out, " {v}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Reads a sidecar count file: one `token<TAB>count` entry per line.
pub fn load_count_file(path: impl AsRef<Path>) -> Result<HashMap<String, u64>> {
    let path = path.as_ref();
    let content = read_to_string(path)?;
    let mut counts = HashMap::new();
    for (line_no, line) in content.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() {
            continue;
        }
        let Some((token, count)) = line.split_once('\t') else {
            return Err(Error::InvalidNumber {
                line: line_no,
                text: line.to_string(),
            });
        };
        let count: u64 = count.trim().parse().map_err(|_| Error::InvalidNumber {
            line: line_no,
            text: count.to_string(),
        })?;
        if counts.insert(token.to_string(), count).is_some() {
            return Err(Error::DuplicateToken {
                token: token.to_string(),
            });
        }
    }
    Ok(counts)
}
