//! Deterministic generator for the bundled end-to-end mini-dataset
//! (tests/fixtures): two topic-clustered corpora, tweet/news embedding
//! files related by a similarity transform, and a 20-pair gold file whose
//! scores come from the pipeline's own T2N geometry plus Gaussian noise
//! (sigma = 0.05).
//!
//! Regenerate with:
//!   cargo test -p lexalign --test acceptance regenerate_fixtures -- --ignored

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lexalign::align::{apply_alignment, common_vocab, procrustes_fit, Direction};
use lexalign::embedding::{save_embeddings, Collection, EmbeddingSet};
use lexalign::eval::{cosine, write_gold, JudgmentRecord};
use lexalign::text::{doc_embedding, preprocess, tf_idf, DocKind, Document};

const SEED: u64 = 2026;
const DIM: usize = 10;
const STEMS: [&str; 4] = ["market", "storm", "match", "vote"];
const SHARED: [&str; 5] = ["today", "people", "new", "live", "report"];

fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let g = nalgebra::DMatrix::from_fn(d, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let q = g.qr().q();
    Array2::from_shape_fn((d, d), |(r, c)| q[(r, c)])
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn generate(dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // Vocabulary: four topics of ten words each plus shared filler words.
    let mut vocab: Vec<String> = Vec::new();
    for stem in STEMS {
        for i in 0..10 {
            vocab.push(format!("{stem}{i}"));
        }
    }
    vocab.extend(SHARED.iter().map(|s| s.to_string()));

    // Tweet vectors cluster around a center per topic; shared words sit
    // near the origin.
    let centers: Vec<Array1<f64>> = (0..STEMS.len())
        .map(|_| {
            let raw = Array1::from_shape_fn(DIM, |_| rng.random::<f64>() * 2.0 - 1.0);
            let norm = raw.dot(&raw).sqrt();
            raw * (1.6 / norm)
        })
        .collect();
    let mut tweet_matrix = Array2::zeros((vocab.len(), DIM));
    for i in 0..vocab.len() {
        let jitter = Array1::from_shape_fn(DIM, |_| (rng.random::<f64>() - 0.5) * 0.7);
        let row = if i < 40 {
            &centers[i / 10] + &jitter
        } else {
            jitter
        };
        tweet_matrix.row_mut(i).assign(&row);
    }

    // News vectors: a similarity transform of the tweet vectors (scale,
    // rotation, translation) plus small noise, so a T2N fit recovers it.
    let q = random_orthogonal(DIM, &mut rng);
    let mu = Array1::from_shape_fn(DIM, |_| rng.random::<f64>() - 0.5);
    let tau = Array1::from_shape_fn(DIM, |_| rng.random::<f64>() * 4.0 - 2.0);
    let mut news_matrix = (&tweet_matrix - &mu).dot(&q) * 1.6;
    news_matrix += &tau;
    for v in news_matrix.iter_mut() {
        *v += 0.01 * (rng.random::<f64>() * 2.0 - 1.0);
    }

    let tweet_set =
        EmbeddingSet::new(vocab.clone(), tweet_matrix, "en", Collection::Tweet).unwrap();
    let news_set = EmbeddingSet::new(vocab, news_matrix, "en", Collection::News).unwrap();

    // Raw tweets: topic words dressed up with hashtags, mentions, URLs,
    // and a couple of OOV words; two retweets that preprocessing drops.
    let mut tweet_raws: Vec<(String, String)> = Vec::new();
    for i in 0..20 {
        let topic = i % 4;
        let n_words = 5 + (i % 3);
        let mut words: Vec<String> = (0..n_words)
            .map(|_| format!("{}{}", STEMS[topic], rng.random_range(0..10)))
            .collect();
        words.push(SHARED[i % SHARED.len()].to_string());
        let mut text = String::new();
        for (wi, w) in words.iter().enumerate() {
            if wi == 1 {
                let _ = write!(text, "#{w} ");
            } else {
                let _ = write!(text, "{w} ");
            }
        }
        if i % 3 == 0 {
            text.push_str("@newsfan ");
        }
        if i % 4 == 0 {
            let _ = write!(text, "http://t.co/x{i} ");
        }
        if i % 5 == 0 {
            text.push_str("BREAKING ");
        }
        tweet_raws.push((format!("tw{i:02}"), text.trim().to_string()));
    }
    tweet_raws.push((
        "tw20".to_string(),
        "RT @someone: market1 market2 today".to_string(),
    ));
    tweet_raws.push((
        "tw21".to_string(),
        "RT @other: vote3 vote4 live".to_string(),
    ));

    // Raw news: longer topic-dominated articles with shared words, a
    // sprinkling of a neighboring topic, and an OOV filler.
    let mut news_raws: Vec<(String, String)> = Vec::new();
    for j in 0..10 {
        let topic = j % 4;
        let len = 30 + rng.random_range(0..15);
        let mut words: Vec<String> = (0..len)
            .map(|_| {
                let r: f64 = rng.random();
                if r < 0.75 {
                    format!("{}{}", STEMS[topic], rng.random_range(0..10))
                } else if r < 0.9 {
                    SHARED[rng.random_range(0..SHARED.len())].to_string()
                } else {
                    format!("{}{}", STEMS[(topic + 1) % 4], rng.random_range(0..10))
                }
            })
            .collect();
        words.push("correspondent".to_string());
        news_raws.push((format!("nw{j:02}"), words.join(" ")));
    }

    let tweet_docs: Vec<Document> = tweet_raws
        .iter()
        .map(|(id, text)| preprocess(text, DocKind::Tweet, "en", id))
        .collect();
    let news_docs: Vec<Document> = news_raws
        .iter()
        .map(|(id, text)| preprocess(text, DocKind::News, "en", id))
        .collect();

    // Twenty judged pairs: even tweets meet a same-topic article, odd
    // tweets a neighboring-topic one, for a healthy similarity spread.
    let mut pair_list: Vec<(String, String)> = Vec::new();
    for i in 0..20 {
        let topic = i % 4;
        let j = if i % 2 == 0 {
            topic + 4 * ((i / 8) % 2)
        } else {
            (topic + 1) % 4 + 4 * ((i / 8) % 2)
        };
        pair_list.push((format!("tw{i:02}"), format!("nw{j:02}")));
    }

    // Gold scores from the pipeline's own T2N geometry plus noise.
    let pairs = common_vocab(&tweet_set, &news_set, None).unwrap();
    let model = procrustes_fit(&pairs, Direction::T2N).unwrap();
    let transformed = apply_alignment(&model, &tweet_set).unwrap();
    let tweet_weights = tf_idf(&tweet_docs).unwrap();
    let news_weights = tf_idf(&news_docs).unwrap();
    let mut gold = Vec::new();
    for (tweet_id, news_id) in &pair_list {
        let tweet_doc = tweet_docs.iter().find(|d| d.id == *tweet_id).unwrap();
        let news_doc = news_docs.iter().find(|d| d.id == *news_id).unwrap();
        let (tv, _) = doc_embedding(tweet_doc, &transformed, &tweet_weights).unwrap();
        let (nv, _) = doc_embedding(news_doc, &news_set, &news_weights).unwrap();
        let sim = cosine(tv.view(), nv.view()).unwrap();
        let score = (0.85 * (sim + 1.0) + 0.05 * gaussian(&mut rng)).clamp(0.0, 2.0);
        gold.push(JudgmentRecord::new(tweet_id, news_id, "en", "en", score).unwrap());
    }

    save_embeddings(&tweet_set, dir.join("tweets.vec")).unwrap();
    save_embeddings(&news_set, dir.join("news.vec")).unwrap();
    write_gold(&gold, dir.join("gold.tsv")).unwrap();
    write_jsonl(&tweet_raws, "tweet", &dir.join("tweets.jsonl"));
    write_jsonl(&news_raws, "news", &dir.join("news.jsonl"));
}

fn write_jsonl(raws: &[(String, String)], kind: &str, path: &Path) {
    let mut out = String::new();
    for (id, text) in raws {
        let record = serde_json::json!({
            "id": id,
            "text": text,
            "lang": "en",
            "kind": kind,
        });
        out.push_str(&record.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).unwrap();
}
