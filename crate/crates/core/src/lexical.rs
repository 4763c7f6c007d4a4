//! Word-usage divergence diagnostics: nearest-neighbor lists compared with
//! rank-biased overlap (RBO).
//!
//! RBO weights agreement at the top of two rankings geometrically by a
//! persistence parameter `p` in (0, 1) and handles incomplete, indefinite
//! lists. The default variant is the extrapolated point estimate; the
//! lower-bound variant is available behind [`RboVariant::Min`] for
//! sensitivity checks.

use std::collections::HashSet;
use std::hash::Hash;

use thiserror::Error;

use crate::embedding::EmbeddingSet;

#[derive(Debug, Error)]
pub enum Error {
    #[error("OOVQuery: token {token:?} is not in the {side} vocabulary")]
    OovQuery { token: String, side: &'static str },
    #[error("InvalidPersistence: p must be in (0, 1), got {0}")]
    InvalidPersistence(f64),
    #[error("EmptyList: ranked lists must be nonempty")]
    EmptyList,
    #[error("EmptyTokenList: no tokens to average over")]
    EmptyTokenList,
    #[error("DuplicateItems: ranked list contains a repeated item")]
    DuplicateItems,
    #[error("InvalidDepth: depth must be at least 1")]
    InvalidDepth,
    #[error("QueryInItems: ranked list contains its own query")]
    QueryInItems,
}

pub type Result<T> = std::result::Result<T, Error>;

/// Which RBO estimate to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RboVariant {
    /// Point estimate extrapolating the agreement at depth `k` to the
    /// indefinite tail.
    Extrapolated,
    /// Lower bound assuming no agreement beyond depth `k`.
    Min,
}

impl std::str::FromStr for RboVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ext" => Ok(RboVariant::Extrapolated),
            "min" => Ok(RboVariant::Min),
            other => Err(format!("unknown RBO variant {other:?} (expected ext|min)")),
        }
    }
}

/// A truncated neighbor ranking for one query token. Items are unique,
/// never contain the query, and number at most `depth`.
#[derive(Debug, Clone)]
pub struct RankedList {
    query: String,
    items: Vec<String>,
    depth: usize,
}

impl RankedList {
    pub fn new(query: impl Into<String>, items: Vec<String>, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidDepth);
        }
        if items.len() > depth {
            return Err(Error::InvalidDepth);
        }
        let query = query.into();
        let mut seen = HashSet::with_capacity(items.len());
        for item in &items {
            if *item == query {
                return Err(Error::QueryInItems);
            }
            if !seen.insert(item.as_str()) {
                return Err(Error::DuplicateItems);
            }
        }
        Ok(Self {
            query,
            items,
            depth,
        })
    }

    pub fn query(&self) -> &str {
        &self.query
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// The `k` tokens most cosine-similar to `query`, descending, ties broken
/// by ascending token rank. Candidates are the whole vocabulary.
pub fn nearest_neighbors(set: &EmbeddingSet, query: &str, k: usize) -> Result<RankedList> {
    if k == 0 {
        return Err(Error::InvalidDepth);
    }
    let candidates: Vec<usize> = (0..set.len()).collect();
    neighbors_among(set, query, k, &candidates)
}

/// Nearest neighbors with the candidate pool restricted to the given row
/// indices (the query itself is excluded from the result).
pub fn neighbors_among(
    set: &EmbeddingSet,
    query: &str,
    k: usize,
    candidates: &[usize],
) -> Result<RankedList> {
    if k == 0 {
        return Err(Error::InvalidDepth);
    }
    let query_rank = set.rank(query).ok_or_else(|| Error::OovQuery {
        token: query.to_string(),
        side: "queried",
    })?;
    let query_vec = set.row(query_rank);
    let query_norm = norm(query_vec.iter());

    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(candidates.len());
    for &rank in candidates {
        if rank == query_rank {
            continue;
        }
        let row = set.row(rank);
        let cand_norm = norm(row.iter());
        // Zero-norm vectors rank last; keeps the ordering total and
        // deterministic without introducing NaN.
        let sim = if query_norm == 0.0 || cand_norm == 0.0 {
            f64::NEG_INFINITY
        } else {
            query_vec.dot(&row) / (query_norm * cand_norm)
        };
        scored.push((sim, rank));
    }
    scored.sort_unstable_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("similarities are never NaN")
            .then(a.1.cmp(&b.1))
    });
    scored.truncate(k);
    let items = scored
        .into_iter()
        .map(|(_, rank)| set.tokens()[rank].clone())
        .collect();
    RankedList::new(query, items, k)
}

fn norm<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    values.map(|v| v * v).sum::<f64>().sqrt()
}

/// Extrapolated RBO of two ranked lists, evaluated at depth
/// `min(s.depth, t.depth, len(s), len(t))`. Symmetric in its arguments.
pub fn rbo(s: &RankedList, t: &RankedList, p: f64) -> Result<f64> {
    rbo_with(s, t, p, RboVariant::Extrapolated)
}

pub fn rbo_with(s: &RankedList, t: &RankedList, p: f64, variant: RboVariant) -> Result<f64> {
    let k = s.depth().min(t.depth()).min(s.len()).min(t.len());
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptyList);
    }
    rbo_items(&s.items()[..k], &t.items()[..k], p, variant)
}

/// RBO over bare item slices; the evaluation depth is the shorter length.
pub fn rbo_items<T: Eq + Hash>(a: &[T], b: &[T], p: f64, variant: RboVariant) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidPersistence(p));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyList);
    }
    let k = a.len().min(b.len());
    if has_duplicates(&a[..k]) || has_duplicates(&b[..k]) {
        return Err(Error::DuplicateItems);
    }

    let mut seen_a: HashSet<&T> = HashSet::with_capacity(k);
    let mut seen_b: HashSet<&T> = HashSet::with_capacity(k);
    let mut overlap = 0usize;
    let mut overlaps = Vec::with_capacity(k);
    let mut all_agree = true;
    for d in 0..k {
        let (x, y) = (&a[d], &b[d]);
        if x == y {
            overlap += 1;
        } else {
            if seen_b.contains(x) {
                overlap += 1;
            }
            if seen_a.contains(y) {
                overlap += 1;
            }
            seen_a.insert(x);
            seen_b.insert(y);
        }
        overlaps.push(overlap);
        all_agree &= overlap == d + 1;
    }

    let x_k = overlap as f64;
    let kf = k as f64;
    match variant {
        RboVariant::Extrapolated => {
            if all_agree {
                // Full prefix agreement extrapolates to exact 1.
                return Ok(1.0);
            }
            let mut sum = 0.0;
            let mut p_pow = 1.0;
            for (d, &x_d) in overlaps.iter().enumerate() {
                p_pow *= p;
                sum += x_d as f64 / (d + 1) as f64 * p_pow;
            }
            Ok(((x_k / kf) * p_pow + (1.0 - p) / p * sum).clamp(0.0, 1.0))
        }
        RboVariant::Min => {
            let mut sum = 0.0;
            let mut p_pow = 1.0;
            for (d, &x_d) in overlaps.iter().enumerate() {
                p_pow *= p;
                sum += (x_d as f64 - x_k) / (d + 1) as f64 * p_pow;
            }
            Ok(((1.0 - p) / p * (sum - x_k * (1.0 - p).ln())).clamp(0.0, 1.0))
        }
    }
}

fn has_duplicates<T: Eq + Hash>(items: &[T]) -> bool {
    let mut seen = HashSet::with_capacity(items.len());
    !items.iter().all(|item| seen.insert(item))
}

/// Per-token RBO between the two sets' neighbor rankings, with the
/// candidate pool restricted to the supplied common token list so both
/// sides rank over the same universe.
pub fn per_token_rbo(
    source: &EmbeddingSet,
    target: &EmbeddingSet,
    tokens: &[String],
    p: f64,
    k: usize,
    variant: RboVariant,
) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(Error::EmptyTokenList);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidPersistence(p));
    }
    if k == 0 {
        return Err(Error::InvalidDepth);
    }
    let resolve = |set: &EmbeddingSet, side: &'static str| -> Result<Vec<usize>> {
        tokens
            .iter()
            .map(|t| {
                set.rank(t).ok_or_else(|| Error::OovQuery {
                    token: t.clone(),
                    side,
                })
            })
            .collect()
    };
    let source_ids = resolve(source, "source")?;
    let target_ids = resolve(target, "target")?;

    let mut values = Vec::with_capacity(tokens.len());
    for token in tokens {
        let s_list = neighbors_among(source, token, k, &source_ids)?;
        let t_list = neighbors_among(target, token, k, &target_ids)?;
        values.push(rbo_with(&s_list, &t_list, p, variant)?);
    }
    Ok(values)
}

/// Arithmetic mean of [`per_token_rbo`], accumulated left-to-right over the
/// supplied token order.
pub fn avg_rbo(
    source: &EmbeddingSet,
    target: &EmbeddingSet,
    tokens: &[String],
    p: f64,
    k: usize,
    variant: RboVariant,
) -> Result<f64> {
    let values = per_token_rbo(source, target, tokens, p, k, variant)?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
