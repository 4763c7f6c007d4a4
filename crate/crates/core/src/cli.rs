//! Command-line orchestration: preprocess, train-bilingual, align
//! fit/apply, rbo, neighbors, docsim, evaluate, and sweep.
//!
//! Exit codes: 0 on success, 1 on operational errors (missing files, no
//! vocabulary overlap, ...), 2 on usage errors. Numeric flags are validated
//! before any work begins. Every run that writes files also writes a
//! metadata record (`<primary output>.meta.json`) with the full parameter
//! set, the seed, and SHA-256 digests of its inputs; all file outputs go
//! through a temp-file-and-rename so failed runs leave nothing behind.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::align::{self, Direction};
use crate::bilingual::{self, BilingualTrainConfig, ParallelCorpus};
use crate::embedding::{self, Collection, EmbeddingSet};
use crate::eval::{self, EvalOptions};
use crate::lexical::{self, RboVariant};
use crate::text;
use crate::util::atomic_write;

#[derive(Parser, Debug)]
#[command(
    name = "lexalign",
    version,
    about = "Align word embedding spaces across collections and languages, \
             and score short-text/article relevance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Preprocess a JSON-Lines corpus into a token dump TSV
    Preprocess(PreprocessArgs),
    /// Jointly train bilingual embeddings over two corpora and a parallel corpus
    TrainBilingual(TrainBilingualArgs),
    /// Fit or apply an alignment model
    #[command(subcommand)]
    Align(AlignCommand),
    /// Average rank-biased overlap of neighbor lists over the common vocabulary
    Rbo(RboArgs),
    /// Nearest neighbors of a query token
    Neighbors(NeighborsArgs),
    /// Cosine similarity of tweet/news document pairs
    Docsim(DocsimArgs),
    /// Correlate predicted pair similarities with gold judgments
    Evaluate(EvaluateArgs),
    /// Evaluate across a list of embedding dimensions and transform modes
    Sweep(SweepArgs),
}

#[derive(Subcommand, Debug)]
enum AlignCommand {
    /// Fit a Procrustes model on the common vocabulary of two embedding sets
    Fit(AlignFitArgs),
    /// Apply a fitted model to an embedding set
    Apply(AlignApplyArgs),
}

fn parse_persistence(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(format!("persistence must be in (0, 1), got {p}"))
    }
}

fn parse_nonneg(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be >= 0, got {v}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be > 0, got {v}"))
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("not an integer: {s:?}"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".to_string())
    }
}

#[derive(Args, Debug)]
struct PreprocessArgs {
    /// JSON-Lines corpus: {"id", "text", "lang", "kind"}
    #[arg(long)]
    input: PathBuf,
    /// Token dump TSV (id<TAB>space-joined tokens)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainBilingualArgs {
    #[arg(long)]
    corpus_l1: PathBuf,
    #[arg(long)]
    corpus_l2: PathBuf,
    /// Plain text, line-aligned with --parallel-l2
    #[arg(long)]
    parallel_l1: PathBuf,
    #[arg(long)]
    parallel_l2: PathBuf,
    #[arg(long, default_value = "en")]
    lang1: String,
    #[arg(long, default_value = "de")]
    lang2: String,
    #[arg(long, default_value_t = 100, value_parser = parse_count)]
    dim: usize,
    #[arg(long, default_value_t = 5, value_parser = parse_count)]
    window: usize,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    min_count: u64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_nonneg)]
    lambda: f64,
    #[arg(long, default_value_t = 5, value_parser = parse_count)]
    epochs: usize,
    #[arg(long, default_value_t = 0.025, value_parser = parse_positive)]
    learning_rate: f64,
    #[arg(long, default_value_t = 5)]
    negative: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Use a left-only context window instead of a symmetric one
    #[arg(long)]
    left_only: bool,
    #[arg(long)]
    out_l1: PathBuf,
    #[arg(long)]
    out_l2: PathBuf,
    /// Optional per-epoch loss TSV
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AlignFitArgs {
    /// Tweet-side embedding file
    #[arg(long)]
    source: PathBuf,
    /// News-side embedding file
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "t2n")]
    direction: Direction,
    /// Keep only the most frequent common tokens
    #[arg(long, value_parser = parse_count)]
    top_f: Option<usize>,
    #[arg(long, default_value = "en")]
    source_lang: String,
    #[arg(long, default_value = "en")]
    target_lang: String,
    /// Sidecar count file overriding the source file's rank order
    #[arg(long)]
    source_counts: Option<PathBuf>,
    #[arg(long)]
    target_counts: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AlignApplyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "en")]
    lang: String,
    #[arg(long, default_value = "tweet")]
    collection: Collection,
}

#[derive(Args, Debug)]
struct RboArgs {
    /// Tweet-side embedding file
    #[arg(long)]
    source: PathBuf,
    /// News-side embedding file
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 0.9, value_parser = parse_persistence)]
    persistence: f64,
    #[arg(long, default_value_t = 100, value_parser = parse_count)]
    depth: usize,
    /// Limit the common vocabulary to its top_f most frequent tokens
    #[arg(long, value_parser = parse_count)]
    top_f: Option<usize>,
    #[arg(long, default_value = "ext")]
    variant: RboVariant,
    /// Also compute the after-transformation value with this model
    #[arg(long)]
    model: Option<PathBuf>,
    /// Per-token TSV report (token, rbo_before[, rbo_after])
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value = "en")]
    source_lang: String,
    #[arg(long, default_value = "en")]
    target_lang: String,
    #[arg(long)]
    source_counts: Option<PathBuf>,
    #[arg(long)]
    target_counts: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct NeighborsArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    query: String,
    #[arg(long, default_value_t = 10, value_parser = parse_count)]
    k: usize,
    #[arg(long, default_value = "en")]
    lang: String,
    #[arg(long, default_value = "tweet")]
    collection: Collection,
    #[arg(long)]
    counts: Option<PathBuf>,
    /// Write a TSV instead of printing to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DocsimArgs {
    /// Tweet corpus (JSON-Lines)
    #[arg(long)]
    tweets: PathBuf,
    /// News corpus (JSON-Lines)
    #[arg(long)]
    news: PathBuf,
    #[arg(long)]
    tweet_vecs: PathBuf,
    #[arg(long)]
    news_vecs: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Pair list TSV (tweet_id<TAB>news_id); defaults to the full cross product
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "en")]
    tweet_lang: String,
    #[arg(long, default_value = "en")]
    news_lang: String,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Gold judgments TSV
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    tweets: PathBuf,
    #[arg(long)]
    news: PathBuf,
    #[arg(long)]
    tweet_vecs: PathBuf,
    #[arg(long)]
    news_vecs: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Treat gold scores as binary labels and report k-fold accuracy
    #[arg(long)]
    binary: bool,
    #[arg(long, default_value_t = 5, value_parser = parse_count)]
    folds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Optional per-pair score TSV
    #[arg(long)]
    per_pair: Option<PathBuf>,
    #[arg(long, default_value = "en")]
    tweet_lang: String,
    #[arg(long, default_value = "en")]
    news_lang: String,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    tweets: PathBuf,
    #[arg(long)]
    news: PathBuf,
    /// Comma-separated embedding files, one per dimension
    #[arg(long, value_delimiter = ',', required = true)]
    tweet_vecs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', required = true)]
    news_vecs: Vec<PathBuf>,
    /// Transform modes to evaluate
    #[arg(long, value_delimiter = ',', default_value = "none,t2n,n2t")]
    mode: Vec<String>,
    #[arg(long, value_parser = parse_count)]
    top_f: Option<usize>,
    #[arg(long)]
    binary: bool,
    #[arg(long, default_value_t = 5, value_parser = parse_count)]
    folds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "en")]
    tweet_lang: String,
    #[arg(long, default_value = "en")]
    news_lang: String,
}

/// Operational failure carrying the module error's display (which leads
/// with the error name, e.g. "NoOverlap: ...").
type OpResult = Result<(), anyhow::Error>;

/// Parses `argv` and runs the selected subcommand, returning the process
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Preprocess(args) => cmd_preprocess(args),
        Command::TrainBilingual(args) => cmd_train_bilingual(args),
        Command::Align(AlignCommand::Fit(args)) => cmd_align_fit(args),
        Command::Align(AlignCommand::Apply(args)) => cmd_align_apply(args),
        Command::Rbo(args) => cmd_rbo(args),
        Command::Neighbors(args) => cmd_neighbors(args),
        Command::Docsim(args) => cmd_docsim(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunMetadata {
    tool: &'static str,
    version: &'static str,
    command: String,
    parameters: BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
    unix_time: u64,
}

fn sha256_of(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    Ok(hex)
}

/// Writes `<primary output>.meta.json` recording the run.
fn write_metadata(
    command: &str,
    parameters: BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
    inputs: &[&Path],
    outputs: &[&Path],
) -> anyhow::Result<()> {
    let Some(primary) = outputs.first() else {
        return Ok(());
    };
    let digests = inputs
        .iter()
        .map(|p| {
            Ok(InputDigest {
                path: p.display().to_string(),
                sha256: sha256_of(p)?,
            })
        })
        .collect::<std::io::Result<Vec<_>>>()?;
    let meta = RunMetadata {
        tool: "lexalign",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        parameters,
        seed,
        inputs: digests,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        unix_time: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let mut name = primary.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    let meta_path = primary.with_file_name(name);
    let json = serde_json::to_string_pretty(&meta)?;
    atomic_write(&meta_path, json.as_bytes())?;
    Ok(())
}

macro_rules! params {
    ($($key:expr => $value:expr),* $(,)?) => {{
        let mut map = BTreeMap::new();
        $(map.insert($key.to_string(), serde_json::json!($value));)*
        map
    }};
}

fn cmd_preprocess(args: PreprocessArgs) -> OpResult {
    let docs = text::read_corpus_jsonl(&args.input)?;
    let dropped = docs.iter().filter(|d| d.dropped).count();
    text::write_token_dump(&docs, &args.out)?;
    write_metadata(
        "preprocess",
        params! {
            "input" => args.input.display().to_string(),
            "out" => args.out.display().to_string(),
            "lowercase" => true,
            "tokenization" => "unicode-alphanumeric",
        },
        None,
        &[&args.input],
        &[&args.out],
    )?;
    println!(
        "preprocessed {} documents ({} dropped) -> {}",
        docs.len(),
        dropped,
        args.out.display()
    );
    Ok(())
}

fn cmd_train_bilingual(args: TrainBilingualArgs) -> OpResult {
    let corpus_l1 = text::read_corpus_jsonl(&args.corpus_l1)?;
    let corpus_l2 = text::read_corpus_jsonl(&args.corpus_l2)?;
    let parallel = ParallelCorpus::from_files(
        &args.parallel_l1,
        &args.parallel_l2,
        (args.lang1.clone(), args.lang2.clone()),
    )?;
    let config = BilingualTrainConfig {
        dim: args.dim,
        window: args.window,
        min_count: args.min_count,
        lambda: args.lambda,
        epochs: args.epochs,
        learning_rate: args.learning_rate,
        negative_samples: args.negative,
        seed: args.seed,
        left_only: args.left_only,
    };
    let (set_l1, set_l2, report) =
        bilingual::train_bilingual(&corpus_l1, &corpus_l2, &parallel, &config)?;
    embedding::save_embeddings(&set_l1, &args.out_l1)?;
    embedding::save_embeddings(&set_l2, &args.out_l2)?;
    let mut outputs: Vec<&Path> = vec![&args.out_l1, &args.out_l2];
    if let Some(report_path) = &args.report {
        let mut tsv = String::from("epoch\tloss_l1\tloss_l2\tregularizer\n");
        for e in 0..report.mono_loss_l1.len() {
            let _ = writeln!(
                tsv,
                "{e}\t{:.6}\t{:.6}\t{:.6}",
                report.mono_loss_l1[e], report.mono_loss_l2[e], report.regularizer_loss[e]
            );
        }
        atomic_write(report_path, tsv.as_bytes())?;
        outputs.push(report_path);
    }
    write_metadata(
        "train-bilingual",
        params! {
            "corpus_l1" => args.corpus_l1.display().to_string(),
            "corpus_l2" => args.corpus_l2.display().to_string(),
            "parallel_l1" => args.parallel_l1.display().to_string(),
            "parallel_l2" => args.parallel_l2.display().to_string(),
            "lang1" => args.lang1,
            "lang2" => args.lang2,
            "dim" => args.dim,
            "window" => args.window,
            "window_mode" => if args.left_only { "left-only" } else { "symmetric" },
            "min_count" => args.min_count,
            "lambda" => args.lambda,
            "epochs" => args.epochs,
            "learning_rate" => args.learning_rate,
            "negative" => args.negative,
            "lowercase" => true,
        },
        Some(args.seed),
        &[
            &args.corpus_l1,
            &args.corpus_l2,
            &args.parallel_l1,
            &args.parallel_l2,
        ],
        &outputs,
    )?;
    println!(
        "trained bilingual embeddings: {} tokens ({}), {} tokens ({}) at d={}",
        report.vocab_size_l1,
        set_l1.language(),
        report.vocab_size_l2,
        set_l2.language(),
        args.dim
    );
    Ok(())
}

fn load_with_counts(
    path: &Path,
    lang: &str,
    collection: Collection,
    counts: Option<&PathBuf>,
) -> Result<EmbeddingSet, embedding::Error> {
    let set = embedding::load_embeddings(path, lang, collection)?;
    match counts {
        Some(counts_path) => {
            let counts = embedding::load_count_file(counts_path)?;
            Ok(set.reranked_by_counts(&counts))
        }
        None => Ok(set),
    }
}

fn cmd_align_fit(args: AlignFitArgs) -> OpResult {
    let source = load_with_counts(
        &args.source,
        &args.source_lang,
        Collection::Tweet,
        args.source_counts.as_ref(),
    )?;
    let target = load_with_counts(
        &args.target,
        &args.target_lang,
        Collection::News,
        args.target_counts.as_ref(),
    )?;
    let pairs = align::common_vocab(&source, &target, args.top_f)?;
    let model = align::procrustes_fit(&pairs, args.direction)?;
    align::save_model(&model, &args.out)?;
    let mut inputs: Vec<&Path> = vec![&args.source, &args.target];
    inputs.extend(args.source_counts.iter().map(|p| p.as_path()));
    inputs.extend(args.target_counts.iter().map(|p| p.as_path()));
    write_metadata(
        "align fit",
        params! {
            "source" => args.source.display().to_string(),
            "target" => args.target.display().to_string(),
            "direction" => model.direction().to_string(),
            "top_f" => args.top_f,
            "source_lang" => args.source_lang,
            "target_lang" => args.target_lang,
            "common_tokens" => pairs.len(),
            "dim" => model.dim(),
        },
        None,
        &inputs,
        &[&args.out],
    )?;
    println!(
        "fitted {} model on {} common tokens (d={}): scale {:.6}, residual {:.6}",
        model.direction(),
        pairs.len(),
        model.dim(),
        model.scale(),
        model.residual()
    );
    Ok(())
}

fn cmd_align_apply(args: AlignApplyArgs) -> OpResult {
    let model = align::load_model(&args.model)?;
    let set = embedding::load_embeddings(&args.input, &args.lang, args.collection)?;
    let transformed = align::apply_alignment(&model, &set)?;
    embedding::save_embeddings(&transformed, &args.out)?;
    write_metadata(
        "align apply",
        params! {
            "model" => args.model.display().to_string(),
            "input" => args.input.display().to_string(),
            "lang" => args.lang,
            "collection" => args.collection.to_string(),
            "direction" => model.direction().to_string(),
            "dim" => model.dim(),
        },
        None,
        &[&args.model, &args.input],
        &[&args.out],
    )?;
    println!(
        "applied {} model to {} vectors -> {}",
        model.direction(),
        transformed.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_rbo(args: RboArgs) -> OpResult {
    let source = load_with_counts(
        &args.source,
        &args.source_lang,
        Collection::Tweet,
        args.source_counts.as_ref(),
    )?;
    let target = load_with_counts(
        &args.target,
        &args.target_lang,
        Collection::News,
        args.target_counts.as_ref(),
    )?;
    let pairs = align::common_vocab(&source, &target, args.top_f)?;
    let tokens = pairs.tokens().to_vec();
    let before = lexical::per_token_rbo(
        &source,
        &target,
        &tokens,
        args.persistence,
        args.depth,
        args.variant,
    )?;
    let mean_before = before.iter().sum::<f64>() / before.len() as f64;

    let after = match &args.model {
        Some(model_path) => {
            let model = align::load_model(model_path)?;
            let (s, t) = match model.direction() {
                Direction::T2N => (align::apply_alignment(&model, &source)?, None),
                Direction::N2T => (source.clone(), Some(align::apply_alignment(&model, &target)?)),
            };
            let t_ref = after_ref(&target, &t);
            Some(lexical::per_token_rbo(
                &s,
                t_ref,
                &tokens,
                args.persistence,
                args.depth,
                args.variant,
            )?)
        }
        None => None,
    };

    if let Some(report_path) = &args.report {
        let mut tsv = String::new();
        match &after {
            Some(after_values) => {
                tsv.push_str("token\trbo_before\trbo_after\n");
                for ((token, b), a) in tokens.iter().zip(&before).zip(after_values) {
                    let _ = writeln!(tsv, "{token}\t{b:.6}\t{a:.6}");
                }
                let mean_after = after_values.iter().sum::<f64>() / after_values.len() as f64;
                let _ = writeln!(tsv, "#mean\t{mean_before:.6}\t{mean_after:.6}");
            }
            None => {
                tsv.push_str("token\trbo\n");
                for (token, b) in tokens.iter().zip(&before) {
                    let _ = writeln!(tsv, "{token}\t{b:.6}");
                }
                let _ = writeln!(tsv, "#mean\t{mean_before:.6}");
            }
        }
        atomic_write(report_path, tsv.as_bytes())?;
        let mut inputs: Vec<&Path> = vec![&args.source, &args.target];
        inputs.extend(args.model.iter().map(|p| p.as_path()));
        write_metadata(
            "rbo",
            params! {
                "source" => args.source.display().to_string(),
                "target" => args.target.display().to_string(),
                "persistence" => args.persistence,
                "depth" => args.depth,
                "top_f" => args.top_f,
                "variant" => match args.variant {
                    RboVariant::Extrapolated => "ext",
                    RboVariant::Min => "min",
                },
                "common_tokens" => tokens.len(),
            },
            None,
            &inputs,
            &[report_path],
        )?;
    }

    println!("avg_rbo_before {mean_before:.6} over {} tokens", tokens.len());
    if let Some(after_values) = &after {
        let mean_after = after_values.iter().sum::<f64>() / after_values.len() as f64;
        println!("avg_rbo_after {mean_after:.6} over {} tokens", tokens.len());
    }
    Ok(())
}

/// Picks the transformed target when the model ran N2T.
fn after_ref<'a>(original: &'a EmbeddingSet, replaced: &'a Option<EmbeddingSet>) -> &'a EmbeddingSet {
    replaced.as_ref().unwrap_or(original)
}

fn cmd_neighbors(args: NeighborsArgs) -> OpResult {
    let set = load_with_counts(
        &args.embeddings,
        &args.lang,
        args.collection,
        args.counts.as_ref(),
    )?;
    let list = lexical::nearest_neighbors(&set, &args.query, args.k)?;
    let query_vec = set.lookup(&args.query).expect("query resolved above");
    let mut lines = String::new();
    for item in list.items() {
        let sim = eval::cosine(query_vec, set.lookup(item).expect("neighbor token exists"))
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|_| "NA".to_string());
        let _ = writeln!(lines, "{item}\t{sim}");
    }
    match &args.out {
        Some(out) => {
            let full = format!("token\tcosine\n{lines}");
            atomic_write(out, full.as_bytes())?;
            let mut inputs: Vec<&Path> = vec![&args.embeddings];
            inputs.extend(args.counts.iter().map(|p| p.as_path()));
            write_metadata(
                "neighbors",
                params! {
                    "embeddings" => args.embeddings.display().to_string(),
                    "query" => args.query,
                    "k" => args.k,
                },
                None,
                &inputs,
                &[out],
            )?;
        }
        None => print!("{lines}"),
    }
    Ok(())
}

fn cmd_docsim(args: DocsimArgs) -> OpResult {
    let tweets = text::read_corpus_jsonl(&args.tweets)?;
    let news = text::read_corpus_jsonl(&args.news)?;
    let tweet_set = embedding::load_embeddings(&args.tweet_vecs, &args.tweet_lang, Collection::Tweet)?;
    let news_set = embedding::load_embeddings(&args.news_vecs, &args.news_lang, Collection::News)?;

    let model = args.model.as_ref().map(align::load_model).transpose()?;
    let (tweet_space, news_space) = match model.as_ref().map(|m| (m, m.direction())) {
        Some((m, Direction::T2N)) => (Some(align::apply_alignment(m, &tweet_set)?), None),
        Some((m, Direction::N2T)) => (None, Some(align::apply_alignment(m, &news_set)?)),
        None => (None, None),
    };
    let tweet_space = tweet_space.as_ref().unwrap_or(&tweet_set);
    let news_space = news_space.as_ref().unwrap_or(&news_set);

    let tweet_weights = text::tf_idf(&tweets)?;
    let news_weights = text::tf_idf(&news)?;

    let pair_list: Vec<(String, String)> = match &args.pairs {
        Some(path) => {
            let content = std::fs::read_to_string(path)
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            content
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| {
                    l.split_once('\t')
                        .map(|(a, b)| (a.to_string(), b.trim().to_string()))
                        .ok_or_else(|| anyhow::anyhow!("bad pair line {l:?}"))
                })
                .collect::<Result<_, _>>()?
        }
        None => {
            let mut pairs = Vec::new();
            for t in tweets.iter().filter(|d| !d.dropped) {
                for n in news.iter().filter(|d| !d.dropped) {
                    pairs.push((t.id.clone(), n.id.clone()));
                }
            }
            pairs
        }
    };

    fn find_doc<'a>(
        docs: &'a [text::Document],
        id: &str,
        kind: &'static str,
    ) -> anyhow::Result<&'a text::Document> {
        docs.iter()
            .find(|d| d.id == id)
            .ok_or_else(|| anyhow::anyhow!("UnresolvedId: {kind} id {id:?} not found"))
    }

    let mut tsv = String::from("tweet_id\tnews_id\tsimilarity\n");
    let mut scored = 0usize;
    let mut skipped = 0usize;
    for (tweet_id, news_id) in &pair_list {
        let tweet_doc = find_doc(&tweets, tweet_id, "tweet")?;
        let news_doc = find_doc(&news, news_id, "news")?;
        let embedded = text::doc_embedding(tweet_doc, tweet_space, &tweet_weights).and_then(
            |(tv, _)| text::doc_embedding(news_doc, news_space, &news_weights).map(|(nv, _)| (tv, nv)),
        );
        match embedded {
            Ok((tv, nv)) => match eval::cosine(tv.view(), nv.view()) {
                Ok(sim) => {
                    let _ = writeln!(tsv, "{tweet_id}\t{news_id}\t{sim:.6}");
                    scored += 1;
                }
                Err(eval::Error::ZeroVector) => skipped += 1,
                Err(other) => return Err(other.into()),
            },
            Err(
                text::Error::NoRepresentableTokens { .. } | text::Error::DroppedDocument { .. },
            ) => skipped += 1,
            Err(other) => return Err(other.into()),
        }
    }
    atomic_write(&args.out, tsv.as_bytes())?;
    let mut inputs: Vec<&Path> = vec![&args.tweets, &args.news, &args.tweet_vecs, &args.news_vecs];
    inputs.extend(args.model.iter().map(|p| p.as_path()));
    inputs.extend(args.pairs.iter().map(|p| p.as_path()));
    write_metadata(
        "docsim",
        params! {
            "tweets" => args.tweets.display().to_string(),
            "news" => args.news.display().to_string(),
            "tweet_vecs" => args.tweet_vecs.display().to_string(),
            "news_vecs" => args.news_vecs.display().to_string(),
            "model" => args.model.as_ref().map(|p| p.display().to_string()),
            "scored" => scored,
            "skipped" => skipped,
        },
        None,
        &inputs,
        &[&args.out],
    )?;
    println!("scored {scored} pairs ({skipped} skipped) -> {}", args.out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> OpResult {
    let gold = eval::read_gold(&args.gold)?;
    let tweets = text::read_corpus_jsonl(&args.tweets)?;
    let news = text::read_corpus_jsonl(&args.news)?;
    let tweet_set = embedding::load_embeddings(&args.tweet_vecs, &args.tweet_lang, Collection::Tweet)?;
    let news_set = embedding::load_embeddings(&args.news_vecs, &args.news_lang, Collection::News)?;
    let model = args.model.as_ref().map(align::load_model).transpose()?;
    let opts = EvalOptions {
        binary: args.binary,
        folds: args.folds,
        seed: args.seed,
        classifier: eval::ClassifierConfig {
            seed: args.seed,
            ..Default::default()
        },
    };
    let report = eval::evaluate_dataset(
        &gold,
        &tweets,
        &news,
        &tweet_set,
        &news_set,
        model.as_ref(),
        &opts,
    )?;
    let rendered = eval::report_to_string(&report);
    atomic_write(&args.out, rendered.as_bytes())?;
    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(per_pair_path) = &args.per_pair {
        atomic_write(per_pair_path, eval::per_pair_tsv(&report).as_bytes())?;
        outputs.push(per_pair_path);
    }
    let mut inputs: Vec<&Path> = vec![
        &args.gold,
        &args.tweets,
        &args.news,
        &args.tweet_vecs,
        &args.news_vecs,
    ];
    inputs.extend(args.model.iter().map(|p| p.as_path()));
    write_metadata(
        "evaluate",
        params! {
            "gold" => args.gold.display().to_string(),
            "tweets" => args.tweets.display().to_string(),
            "news" => args.news.display().to_string(),
            "tweet_vecs" => args.tweet_vecs.display().to_string(),
            "news_vecs" => args.news_vecs.display().to_string(),
            "model" => args.model.as_ref().map(|p| p.display().to_string()),
            "binary" => args.binary,
            "folds" => args.folds,
            "transform" => report.transform.to_string(),
        },
        Some(args.seed),
        &inputs,
        &outputs,
    )?;
    print!("{rendered}");
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> OpResult {
    if args.tweet_vecs.len() != args.news_vecs.len() {
        anyhow::bail!(
            "sweep needs matching file lists: {} tweet-vecs vs {} news-vecs",
            args.tweet_vecs.len(),
            args.news_vecs.len()
        );
    }
    let modes: Vec<Option<Direction>> = args
        .mode
        .iter()
        .map(|m| match m.as_str() {
            "none" => Ok(None),
            other => other.parse::<Direction>().map(Some).map_err(anyhow::Error::msg),
        })
        .collect::<Result<_, _>>()?;

    let gold = eval::read_gold(&args.gold)?;
    let tweets = text::read_corpus_jsonl(&args.tweets)?;
    let news = text::read_corpus_jsonl(&args.news)?;
    let opts = EvalOptions {
        binary: args.binary,
        folds: args.folds,
        seed: args.seed,
        classifier: eval::ClassifierConfig {
            seed: args.seed,
            ..Default::default()
        },
    };

    let mut tsv = String::from("dim\tmode\tpearson_r\tn_pairs\tskipped\taccuracy\n");
    for (tweet_path, news_path) in args.tweet_vecs.iter().zip(&args.news_vecs) {
        let tweet_set =
            embedding::load_embeddings(tweet_path, &args.tweet_lang, Collection::Tweet)?;
        let news_set = embedding::load_embeddings(news_path, &args.news_lang, Collection::News)?;
        for mode in &modes {
            let model = match mode {
                None => None,
                Some(direction) => {
                    let pairs = align::common_vocab(&tweet_set, &news_set, args.top_f)?;
                    Some(align::procrustes_fit(&pairs, *direction)?)
                }
            };
            let report = eval::evaluate_dataset(
                &gold,
                &tweets,
                &news,
                &tweet_set,
                &news_set,
                model.as_ref(),
                &opts,
            )?;
            let accuracy = report
                .accuracy
                .map(|a| format!("{a:.6}"))
                .unwrap_or_else(|| "NA".to_string());
            let mode_name = match mode {
                None => "none".to_string(),
                Some(d) => d.to_string().to_lowercase(),
            };
            let _ = writeln!(
                tsv,
                "{}\t{}\t{:.6}\t{}\t{}\t{}",
                report.dim, mode_name, report.pearson_r, report.n_pairs, report.skipped, accuracy
            );
            println!(
                "dim {} mode {} pearson_r {:.6} n {} skipped {}",
                report.dim, mode_name, report.pearson_r, report.n_pairs, report.skipped
            );
        }
    }
    atomic_write(&args.out, tsv.as_bytes())?;
    let mut inputs: Vec<&Path> = vec![&args.gold, &args.tweets, &args.news];
    inputs.extend(args.tweet_vecs.iter().map(|p| p.as_path()));
    inputs.extend(args.news_vecs.iter().map(|p| p.as_path()));
    write_metadata(
        "sweep",
        params! {
            "gold" => args.gold.display().to_string(),
            "modes" => args.mode,
            "top_f" => args.top_f,
            "binary" => args.binary,
            "folds" => args.folds,
        },
        Some(args.seed),
        &inputs,
        &[&args.out],
    )?;
    Ok(())
}
