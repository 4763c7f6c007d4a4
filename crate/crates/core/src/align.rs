//! Procrustes alignment between paired embedding matrices: translation,
//! uniform scaling, and orthogonal rotation, fitted in closed form over a
//! common vocabulary and applicable in either direction.
//!
//! Given row-paired matrices `S` (the side being transformed) and `T`, the
//! fit centers both at their row means, computes the SVD of the cross
//! matrix `S~' T~ = U Sigma V'`, and takes the rotation `Q = U V'` and the
//! scale `j = trace(Sigma) / |S~|_F^2`. Among all orthogonal matrices and
//! positive scales these minimize the Frobenius error `|T~ - j S~ Q|_F`.
//! Applying the model maps a row `x` to `j (x - mu_S) Q + mu_T`, so
//! transformed vectors land in the target's coordinate frame and are
//! directly comparable with untransformed target vectors. Reflections are
//! permitted (`det Q` may be -1).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use thiserror::Error;

use crate::embedding::EmbeddingSet;
use crate::util::{atomic_write, read_to_string};

/// Tolerance below which the centered source is treated as degenerate,
/// relative to the uncentered norm.
const DEGENERATE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum Error {
    #[error("NoOverlap: source and target vocabularies share no tokens")]
    NoOverlap,
    #[error("InsufficientOverlap: {found} common token(s), need at least 2")]
    InsufficientOverlap { found: usize },
    #[error("DimMismatch: source dimension {left} != target dimension {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("DegenerateSource: all source rows are identical (centered norm is zero)")]
    DegenerateSource,
    #[error("DegenerateTarget: centered target has zero cross-covariance with the source")]
    DegenerateTarget,
    #[error("NonFinite: pair matrices contain a non-finite value")]
    NonFinite,
    #[error("LanguageMismatch: sets are tagged {left:?} and {right:?}")]
    LanguageMismatch { left: String, right: String },
    #[error("ModelParse: {path}: line {line}: {message}")]
    ModelParse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Transformation orientation: tweet embeddings into news space, or news
/// into tweet space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    T2N,
    N2T,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::T2N => write!(f, "T2N"),
            Direction::N2T => write!(f, "N2T"),
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "t2n" => Ok(Direction::T2N),
            "n2t" => Ok(Direction::N2T),
            other => Err(format!("unknown direction {other:?} (expected t2n|n2t)")),
        }
    }
}

/// Row-paired common-vocabulary matrices. Row `i` of both matrices embeds
/// the same token; the source side is the tweet collection, the target side
/// the news collection.
#[derive(Debug, Clone)]
pub struct PairedVocabulary {
    tokens: Vec<String>,
    source: Array2<f64>,
    target: Array2<f64>,
}

impl PairedVocabulary {
    pub fn new(tokens: Vec<String>, source: Array2<f64>, target: Array2<f64>) -> Result<Self> {
        if source.ncols() != target.ncols() {
            return Err(Error::DimMismatch {
                left: source.ncols(),
                right: target.ncols(),
            });
        }
        if source.nrows() != tokens.len() || target.nrows() != tokens.len() {
            return Err(Error::DimMismatch {
                left: source.nrows(),
                right: target.nrows(),
            });
        }
        match tokens.len() {
            0 => return Err(Error::NoOverlap),
            1 => return Err(Error::InsufficientOverlap { found: 1 }),
            _ => {}
        }
        if tokens.len() < source.ncols() {
            log::warn!(
                "common vocabulary ({}) is smaller than the embedding dimension ({}); \
                 the fit is underdetermined",
                tokens.len(),
                source.ncols()
            );
        }
        Ok(Self {
            tokens,
            source,
            target,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.source.ncols()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn source(&self) -> ArrayView2<'_, f64> {
        self.source.view()
    }

    pub fn target(&self) -> ArrayView2<'_, f64> {
        self.target.view()
    }
}

/// Fitted similarity transform between two embedding spaces.
#[derive(Debug, Clone)]
pub struct AlignmentModel {
    source_centroid: Array1<f64>,
    target_centroid: Array1<f64>,
    scale: f64,
    rotation: Array2<f64>,
    direction: Direction,
    dim: usize,
    residual: f64,
}

impl AlignmentModel {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation(&self) -> ArrayView2<'_, f64> {
        self.rotation.view()
    }

    pub fn source_centroid(&self) -> &Array1<f64> {
        &self.source_centroid
    }

    pub fn target_centroid(&self) -> &Array1<f64> {
        &self.target_centroid
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Frobenius norm of the fit error on the training pairs.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Maps a matrix of row vectors through `j (X - mu_S) Q + mu_T`.
    pub fn transform_matrix(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if rows.ncols() != self.dim {
            return Err(Error::DimMismatch {
                left: rows.ncols(),
                right: self.dim,
            });
        }
        let centered = &rows - &self.source_centroid;
        let mut mapped = centered.dot(&self.rotation);
        mapped *= self.scale;
        mapped += &self.target_centroid;
        Ok(mapped)
    }
}

/// Intersects two vocabularies, ordered by the source set's rank and
/// optionally truncated to the `top_f` most frequent common tokens.
pub fn common_vocab(
    source: &EmbeddingSet,
    target: &EmbeddingSet,
    top_f: Option<usize>,
) -> Result<PairedVocabulary> {
    if source.dim() != target.dim() {
        return Err(Error::DimMismatch {
            left: source.dim(),
            right: target.dim(),
        });
    }
    let limit = top_f.unwrap_or(usize::MAX);
    let mut tokens = Vec::new();
    let mut source_rows = Vec::new();
    let mut target_rows = Vec::new();
    for token in source.tokens() {
        if tokens.len() == limit {
            break;
        }
        if let Some(target_row) = target.lookup(token) {
            let source_row = source.lookup(token).expect("token comes from source");
            tokens.push(token.clone());
            source_rows.push(source_row);
            target_rows.push(target_row);
        }
    }
    if tokens.is_empty() {
        return Err(Error::NoOverlap);
    }
    let d = source.dim();
    let stack = |rows: &[ndarray::ArrayView1<'_, f64>]| {
        let mut m = Array2::zeros((rows.len(), d));
        for (i, row) in rows.iter().enumerate() {
            m.row_mut(i).assign(row);
        }
        m
    };
    PairedVocabulary::new(tokens, stack(&source_rows), stack(&target_rows))
}

/// Fits the optimal translation, scale, and rotation mapping one side of
/// the pairs onto the other. `Direction::T2N` maps the source (tweet) side
/// onto the target (news) side; `Direction::N2T` swaps the roles.
pub fn procrustes_fit(pairs: &PairedVocabulary, direction: Direction) -> Result<AlignmentModel> {
    let (s_mat, t_mat) = match direction {
        Direction::T2N => (pairs.source(), pairs.target()),
        Direction::N2T => (pairs.target(), pairs.source()),
    };
    if s_mat.iter().any(|v| !v.is_finite()) || t_mat.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let d = s_mat.ncols();

    let source_centroid = s_mat.mean_axis(Axis(0)).expect("c >= 2");
    let target_centroid = t_mat.mean_axis(Axis(0)).expect("c >= 2");
    let s_centered = &s_mat - &source_centroid;
    let t_centered = &t_mat - &target_centroid;

    let s_norm_sq: f64 = s_centered.iter().map(|v| v * v).sum();
    let s_raw_norm_sq: f64 = s_mat.iter().map(|v| v * v).sum();
    if s_norm_sq.sqrt() <= DEGENERATE_REL_TOL * s_raw_norm_sq.sqrt().max(1.0) {
        return Err(Error::DegenerateSource);
    }

    let cross = s_centered.t().dot(&t_centered);
    let cross_na = nalgebra::DMatrix::from_row_slice(
        d,
        d,
        cross.as_slice().expect("dot output is standard layout"),
    );
    let svd = cross_na.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let trace_sigma: f64 = svd.singular_values.iter().sum();
    if trace_sigma <= 0.0 {
        return Err(Error::DegenerateTarget);
    }
    let q_na = u * v_t;
    let rotation = Array2::from_shape_fn((d, d), |(r, c)| q_na[(r, c)]);

    let scale = trace_sigma / s_norm_sq;
    let mut fitted = s_centered.dot(&rotation);
    fitted *= scale;
    let residual = (&t_centered - &fitted)
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();

    Ok(AlignmentModel {
        source_centroid,
        target_centroid,
        scale,
        rotation,
        direction,
        dim: d,
        residual,
    })
}

/// Applies a fitted model to every row of a set. The output keeps token
/// order, language, and collection tags, and is tagged as transformed.
pub fn apply_alignment(model: &AlignmentModel, set: &EmbeddingSet) -> Result<EmbeddingSet> {
    if set.dim() != model.dim {
        return Err(Error::DimMismatch {
            left: set.dim(),
            right: model.dim,
        });
    }
    let matrix = model.transform_matrix(set.matrix())?;
    let index: HashMap<String, usize> = set
        .tokens()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(EmbeddingSet::from_parts_unchecked(
        set.tokens().to_vec(),
        index,
        matrix,
        set.language().to_string(),
        set.collection(),
        true,
    ))
}

/// Cross-lingual step two: fits a T2N transform from a tweet set onto the
/// same-language bilingual news set over their common vocabulary, then maps
/// the full tweet vocabulary into the shared bilingual space.
pub fn fit_and_transform_crosslingual(
    tweet_set: &EmbeddingSet,
    bilingual_news: &EmbeddingSet,
    top_f: Option<usize>,
) -> Result<(AlignmentModel, EmbeddingSet)> {
    if tweet_set.language() != bilingual_news.language() {
        return Err(Error::LanguageMismatch {
            left: tweet_set.language().to_string(),
            right: bilingual_news.language().to_string(),
        });
    }
    let pairs = common_vocab(tweet_set, bilingual_news, top_f)?;
    let model = procrustes_fit(&pairs, Direction::T2N)?;
    let transformed = apply_alignment(&model, tweet_set)?;
    Ok((model, transformed))
}

const MODEL_MAGIC: &str = "alignment-model v1";

/// Serializes a model as a structured text document. Floats are printed
/// with 17 significant digits, so parsing them back reproduces the exact
/// values and the format roundtrips bit-stably.
pub fn model_to_string(model: &AlignmentModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC}");
    let _ = writeln!(out, "dim {}", model.dim);
    let _ = writeln!(out, "direction {}", model.direction);
    let _ = writeln!(out, "scale {:.16e}", model.scale);
    let _ = writeln!(out, "residual {:.16e}", model.residual);
    let write_vec = |out: &mut String, key: &str, values: &mut dyn Iterator<Item = f64>| {
        out.push_str(key);
        for v in values {
            let _ = write!(out, " {v:.16e}");
        }
        out.push('\n');
    };
    write_vec(
        &mut out,
        "source_centroid",
        &mut model.source_centroid.iter().copied(),
    );
    write_vec(
        &mut out,
        "target_centroid",
        &mut model.target_centroid.iter().copied(),
    );
    write_vec(&mut out, "rotation", &mut model.rotation.iter().copied());
    out
}

pub fn save_model(model: &AlignmentModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    atomic_write(path, model_to_string(model).as_bytes())
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<AlignmentModel> {
    let path = path.as_ref();
    let content = read_to_string(path)?;
    parse_model(&content, path)
}

fn parse_model(content: &str, path: &Path) -> Result<AlignmentModel> {
    let err = |line: usize, message: String| Error::ModelParse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = content.lines().enumerate();
    let (_, magic) = lines
        .next()
        .ok_or_else(|| err(1, "empty file".to_string()))?;
    if magic.trim() != MODEL_MAGIC {
        return Err(err(1, format!("expected {MODEL_MAGIC:?} header")));
    }

    let mut dim: Option<usize> = None;
    let mut direction: Option<Direction> = None;
    let mut scale: Option<f64> = None;
    let mut residual: Option<f64> = None;
    let mut source_centroid: Option<Vec<f64>> = None;
    let mut target_centroid: Option<Vec<f64>> = None;
    let mut rotation: Option<Vec<f64>> = None;

    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let key = fields.next().expect("nonempty line");
        let parse_floats = |fields: std::str::SplitWhitespace<'_>| -> Result<Vec<f64>> {
            fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| err(line_no, format!("bad float {f:?}")))
                })
                .collect()
        };
        match key {
            "dim" => {
                let v = fields
                    .next()
                    .ok_or_else(|| err(line_no, "missing dim value".into()))?;
                dim = Some(
                    v.parse()
                        .map_err(|_| err(line_no, format!("bad dim {v:?}")))?,
                );
            }
            "direction" => {
                let v = fields
                    .next()
                    .ok_or_else(|| err(line_no, "missing direction value".into()))?;
                direction = Some(v.parse().map_err(|e| err(line_no, e))?);
            }
            "scale" => scale = Some(parse_floats(fields)?[0]),
            "residual" => residual = Some(parse_floats(fields)?[0]),
            "source_centroid" => source_centroid = Some(parse_floats(fields)?),
            "target_centroid" => target_centroid = Some(parse_floats(fields)?),
            "rotation" => rotation = Some(parse_floats(fields)?),
            other => return Err(err(line_no, format!("unknown key {other:?}"))),
        }
    }

    let missing = |what: &str| err(0, format!("missing {what}"));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let direction = direction.ok_or_else(|| missing("direction"))?;
    let scale = scale.ok_or_else(|| missing("scale"))?;
    let residual = residual.ok_or_else(|| missing("residual"))?;
    let source_centroid = source_centroid.ok_or_else(|| missing("source_centroid"))?;
    let target_centroid = target_centroid.ok_or_else(|| missing("target_centroid"))?;
    let rotation = rotation.ok_or_else(|| missing("rotation"))?;

    if dim == 0 {
        return Err(err(0, "dim must be at least 1".into()));
    }
    if source_centroid.len() != dim || target_centroid.len() != dim {
        return Err(err(0, format!("centroid length != dim {dim}")));
    }
    if rotation.len() != dim * dim {
        return Err(err(0, format!("rotation length != dim^2 ({})", dim * dim)));
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(err(0, format!("scale must be finite and positive, got {scale}")));
    }
    if !residual.is_finite() || residual < 0.0 {
        return Err(err(0, format!("residual must be finite and nonnegative, got {residual}")));
    }
    if source_centroid.iter().any(|v| !v.is_finite())
        || target_centroid.iter().any(|v| !v.is_finite())
        || rotation.iter().any(|v| !v.is_finite())
    {
        return Err(err(0, "non-finite model entry".into()));
    }

    let rotation = Array2::from_shape_vec((dim, dim), rotation).expect("length checked");
    let ortho_err = orthogonality_error(&rotation.view());
    if ortho_err > 1e-8 {
        return Err(err(
            0,
            format!("rotation is not orthogonal (|Q'Q - I|_F = {ortho_err:.3e})"),
        ));
    }

    Ok(AlignmentModel {
        source_centroid: Array1::from_vec(source_centroid),
        target_centroid: Array1::from_vec(target_centroid),
        scale,
        rotation,
        direction,
        dim,
        residual,
    })
}

/// Frobenius norm of `Q'Q - I`.
pub fn orthogonality_error(q: &ArrayView2<'_, f64>) -> f64 {
    let d = q.ncols();
    let qtq = q.t().dot(q);
    let mut sum = 0.0;
    for r in 0..d {
        for c in 0..d {
            let target = if r == c { 1.0 } else { 0.0 };
            let diff = qtq[(r, c)] - target;
            sum += diff * diff;
        }
    }
    sum.sqrt()
}
