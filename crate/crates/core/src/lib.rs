//! Toolkit for aligning word embedding spaces across text collections and
//! languages.
//!
//! Word embeddings trained on informal short texts (tweets) and on formal
//! corpora (news articles) end up in incompatible spaces even when the
//! vocabularies overlap. This crate fits a similarity transform
//! (translation, uniform scaling, orthogonal rotation) between the two
//! spaces over their common vocabulary and applies it in either direction,
//! monolingually or against jointly trained bilingual embeddings. On top of
//! the aligned spaces it provides lexical agreement diagnostics
//! (rank-biased overlap over nearest-neighbor lists), tf-idf weighted
//! document embeddings, and pairwise relevance scoring with statistical
//! evaluation.
//!
//! The `lexalign` binary orchestrates the full pipeline; see the README for
//! the subcommand reference and file formats.

pub mod align;
pub mod bilingual;
pub mod cli;
pub mod embedding;
pub mod eval;
pub mod lexical;
pub mod text;
pub(crate) mod util;

pub use align::{AlignmentModel, Direction, PairedVocabulary};

#[cfg(test)]
pub(crate) fn test_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
pub use bilingual::{BilingualTrainConfig, ParallelCorpus, TrainReport};
pub use embedding::{Collection, EmbeddingSet};
pub use eval::{EvalOptions, EvalReport, JudgmentRecord, LinearClassifier, Relevance};
pub use lexical::{RankedList, RboVariant};
pub use text::{DocKind, Document, WeightedVocabulary};
