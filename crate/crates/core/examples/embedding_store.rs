//! Externally computed embeddings: build a per-utterance store, write it in
//! the manifest + payload format, load it back and score trials with mean
//! pooled cosine and negated Euclidean distance.
//!
//! The "encoder" here is a toy hashed bag of words standing in for a neural
//! model run elsewhere.
//!
//!     cargo run --release --example embedding_store

use std::hash::{DefaultHasher, Hash, Hasher};

use speakerbench::corpus::{generate_synthetic, split_speakers, Split, SplitRatios, SynthConfig};
use speakerbench::eval::score_auc;
use speakerbench::normalize::{prepare_corpus, Style};
use speakerbench::scoring::{
    load_embeddings, payload_path, save_embeddings, score_trials, word_tokens, EmbeddingStore, Granularity,
    Similarity, VectorScorer,
};
use speakerbench::trials::{build_trials, Difficulty, TrialTargets};

const DIM: usize = 64;

fn embed(text: &str) -> [f32; DIM] {
    let mut v = [0f32; DIM];
    for tok in word_tokens(text) {
        let mut h = DefaultHasher::new();
        tok.hash(&mut h);
        let x = h.finish();
        v[(x % DIM as u64) as usize] += if x >> 63 == 0 { 1.0 } else { -1.0 };
    }
    v
}

fn main() -> speakerbench::Result<()> {
    let (corpus, _) = prepare_corpus(&generate_synthetic(&SynthConfig::benchmark(2))?, 5, Some(Style::NormLdc))?;
    let assignment = split_speakers(&corpus, SplitRatios::default(), 2)?;
    let trials = build_trials(&corpus, &assignment, Split::Test, Difficulty::Base, 2, TrialTargets::default())?;

    let mut store = EmbeddingStore::new(DIM, Granularity::Utterance)?;
    for side in corpus.sides() {
        let rows: Vec<f32> = side.utterances.iter().flat_map(|u| embed(&u.text)).collect();
        store.insert(side.key(), rows)?;
    }

    let dir = std::env::temp_dir().join(format!("speakerbench-emb-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| speakerbench::Error::io(&dir, e))?;
    let manifest = dir.join("embeddings.json");
    save_embeddings(&store, &manifest)?;
    let bytes = std::fs::metadata(payload_path(&manifest)).map(|m| m.len()).unwrap_or(0);
    let loaded = load_embeddings(&manifest)?;
    println!("{} sides, {} payload bytes, reload equal: {}", loaded.len(), bytes, loaded == store);

    for (name, sim) in [("embed-cos", Similarity::Cosine), ("embed-negeuc", Similarity::NegEuclidean)] {
        let scorer = VectorScorer::new(name, loaded.clone(), sim);
        let scores = score_trials(&trials.trials, &corpus, &scorer)?;
        println!("{name:<13} AUC {:.3}", score_auc(&scores)?);
        // the store covers every side, most of which no test trial uses
        if let Some(w) = scores.warnings.first() {
            println!("  warning: {w}");
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
