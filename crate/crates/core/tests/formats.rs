use std::collections::BTreeSet;
use std::fs;

use speakerbench::corpus::{generate_synthetic, split_speakers, Channel, CountDistribution, SideKey, SpeakerSide, Split, SplitRatios, SynthConfig, Utterance};
use speakerbench::head::{fit_mlp, load_head, save_head, HeadConfig};
use speakerbench::scoring::{
    load_embeddings, payload_path, read_scores, save_embeddings, score_trials, write_scores, EmbeddingStore,
    Granularity, Similarity, SparseVec, VectorScorer,
};
use speakerbench::trials::{build_trials, read_lemma_sets, read_trials, write_trials, Difficulty, LemmaSource, TrialTargets};
use speakerbench::Error;

fn side(conv: &str, channel: Channel, n: usize) -> SpeakerSide {
    SpeakerSide {
        conversation_id: conv.into(),
        speaker_id: format!("spk_{conv}_{channel}"),
        channel,
        topic_id: "t".into(),
        encoding: "LDC".into(),
        utterances: (0..n).map(|i| Utterance::new(i, format!("word{i}"))).collect(),
    }
}

/// What the embedding sidecar writes: a JSON manifest plus a raw f32 LE payload.
fn write_sidecar_output(dir: &std::path::Path, manifest: &str, floats: &[f32]) -> std::path::PathBuf {
    let path = dir.join("emb.json");
    fs::write(&path, manifest).unwrap();
    let bytes: Vec<u8> = floats.iter().flat_map(|f| f.to_le_bytes()).collect();
    fs::write(payload_path(&path), bytes).unwrap();
    path
}

#[test]
fn sidecar_manifest_loads_and_pools() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = r#"{
        "dim": 2, "dtype": "f32le", "granularity": "utterance",
        "entries": [
            {"key": "c1/left", "offset": 0, "count": 4},
            {"key": "c1/right", "offset": 4, "count": 2}
        ]
    }"#;
    let path = write_sidecar_output(dir.path(), manifest, &[1.0, 0.0, 3.0, 2.0, 0.5, 0.5]);
    let store = load_embeddings(&path).unwrap();
    assert_eq!((store.dim(), store.granularity(), store.len()), (2, Granularity::Utterance, 2));
    let key = SideKey::new("c1", Channel::Left);
    assert_eq!(store.rows(&key), Some(2));
    assert_eq!(store.side_vector(&side("c1", Channel::Left, 2)).unwrap(), vec![2.0, 1.0]);

    let copy = dir.path().join("copy.json");
    save_embeddings(&store, &copy).unwrap();
    assert_eq!(load_embeddings(&copy).unwrap(), store);
}

#[test]
fn sidecar_manifest_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = r#"{"dim": 2, "dtype": "f32le", "granularity": "side", "entries": [{"key": "c1/left", "offset": 0, "count": 2}]}"#;

    let short = write_sidecar_output(dir.path(), good, &[1.0]);
    let err = load_embeddings(&short).unwrap_err();
    assert!(matches!(err, Error::Format { .. }) && err.to_string().contains("truncated"), "{err}");

    let path = write_sidecar_output(dir.path(), good, &[1.0, 2.0]);
    let mut ragged = fs::read(payload_path(&path)).unwrap();
    ragged.pop();
    fs::write(payload_path(&path), ragged).unwrap();
    assert!(load_embeddings(&path).unwrap_err().to_string().contains("truncated"));

    let f16 = write_sidecar_output(dir.path(), &good.replace("f32le", "f16le"), &[1.0, 2.0]);
    assert!(load_embeddings(&f16).unwrap_err().to_string().contains("dtype"));

    let wrong_dim = write_sidecar_output(dir.path(), &good.replace("\"count\": 2", "\"count\": 3"), &[1.0, 2.0, 3.0]);
    assert!(load_embeddings(&wrong_dim).unwrap_err().to_string().contains("dim mismatch"));

    let extra = write_sidecar_output(dir.path(), &good.replace("\"dim\": 2,", "\"dim\": 2, \"model\": \"x\","), &[1.0, 2.0]);
    assert!(load_embeddings(&extra).is_err());
}

#[test]
fn embedding_scorer_reports_missing_sides() {
    let mut store = EmbeddingStore::new(2, Granularity::Side).unwrap();
    store.insert(SideKey::new("c1", Channel::Left), vec![1.0, 0.0]).unwrap();
    let corpus = speakerbench::corpus::Corpus::new(
        vec![side("c1", Channel::Left, 1), side("c1", Channel::Right, 1)],
        speakerbench::corpus::Provenance::Canonical,
    )
    .unwrap();
    let trial = speakerbench::trials::Trial {
        trial_id: "t".into(),
        left: SideKey::new("c1", Channel::Left),
        right: SideKey::new("c1", Channel::Right),
        label: speakerbench::trials::Label::Negative,
        difficulty: Difficulty::Harder,
    };
    let scorer = VectorScorer::new("embed-cos", store, Similarity::Cosine);
    assert!(score_trials(&[trial], &corpus, &scorer).is_err());
}

#[test]
fn lemma_override_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lemmas.jsonl");
    fs::write(
        &path,
        "{\"key\": \"c1/left\", \"lemmas\": [\"dog\", \"fish\", \"dog\"]}\n\n{\"key\": \"c2/right\", \"lemmas\": []}\n",
    )
    .unwrap();
    let sets = read_lemma_sets(&path).unwrap();
    assert_eq!(sets.len(), 2);
    let source = LemmaSource::Precomputed(sets);
    let want: BTreeSet<String> = ["dog", "fish"].map(String::from).into();
    assert_eq!(source.lemmas(&side("c1", Channel::Left, 1)), want);
    assert!(source.lemmas(&side("c9", Channel::Left, 1)).is_empty());

    fs::write(&path, "{\"key\": \"c1/left\", \"lemmas\": [\"dog\"]}\n{\"key\": \"c1/right\"}\n").unwrap();
    match read_lemma_sets(&path).unwrap_err() {
        Error::Format { line, .. } => assert_eq!(line, Some(2)),
        other => panic!("unexpected {other}"),
    }
}

fn small_corpus() -> speakerbench::corpus::Corpus {
    generate_synthetic(&SynthConfig {
        n_speakers: 20,
        n_topics: 3,
        conversations_per_speaker: 3,
        utterances_per_side: CountDistribution { mean: 8.0, spread: 2.0 },
        seed: 5,
        ..SynthConfig::default()
    })
    .unwrap()
}

#[test]
fn trial_and_score_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus();
    let assignment = split_speakers(&corpus, SplitRatios::default(), 0).unwrap();
    let set = build_trials(&corpus, &assignment, Split::Train, Difficulty::Base, 2, TrialTargets::default()).unwrap();
    let tpath = dir.path().join("trials.jsonl");
    write_trials(&set, &tpath).unwrap();
    let (trials, split) = read_trials(&tpath).unwrap();
    assert_eq!((trials, split), (set.trials.clone(), Some(Split::Train)));

    let docs: Vec<String> = corpus.sides().iter().map(|s| s.text()).collect();
    let model = speakerbench::scoring::fit_tfidf(&docs, speakerbench::scoring::Analyzer::Word).unwrap();
    let scores = score_trials(&set.trials, &corpus, &VectorScorer::new("tfidf", model, Similarity::Cosine)).unwrap();
    let spath = dir.path().join("scores.jsonl");
    write_scores(&scores, &spath).unwrap();
    let back = read_scores(&spath).unwrap();
    let mut written = scores.records.clone();
    written.sort_by(|a, b| a.trial_id.cmp(&b.trial_id));
    assert_eq!(back.records, written);
    assert_eq!(back.scorer, "tfidf");

    let mut text = fs::read_to_string(&spath).unwrap();
    text.push_str("{\"trial_id\": \"x\", \"label\": \"maybe\", \"score\": 0.1, \"scorer\": \"tfidf\"}\n");
    fs::write(&spath, text).unwrap();
    assert!(matches!(read_scores(&spath).unwrap_err(), Error::Format { .. }));
}

#[test]
fn head_checkpoint_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let xs: Vec<SparseVec> = (0..20)
        .map(|i| SparseVec::from_dense(&[i as f64 / 20.0, 1.0 - i as f64 / 10.0, 0.5, 0.0]))
        .collect();
    let ys: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
    let cfg = HeadConfig {
        hidden_sizes: vec![8],
        max_iterations: 20,
        ..HeadConfig::default()
    };
    let (head, _) = fit_mlp(&xs, &ys, &cfg).unwrap();
    let path = dir.path().join("head.bin");
    save_head(&head, &path).unwrap();
    let bytes = fs::read(&path).unwrap();
    assert_eq!(&bytes[..8], b"SPKHEAD\0");
    let back = load_head(&path).unwrap();
    assert_eq!(back, head);
    assert_eq!(back.predict_batch(&xs).unwrap(), head.predict_batch(&xs).unwrap());

    fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(load_head(&path).unwrap_err().to_string().contains("truncated"));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    fs::write(&path, bad).unwrap();
    assert!(load_head(&path).unwrap_err().to_string().contains("magic"));
}

#[test]
fn synth_config_toml() {
    let cfg = SynthConfig::benchmark(4);
    let text = cfg.to_toml_string();
    assert_eq!(SynthConfig::from_toml_str(&text).unwrap(), cfg);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("synth.toml");
    fs::write(&path, &text).unwrap();
    assert_eq!(SynthConfig::load(&path).unwrap(), cfg);
    assert!(SynthConfig::from_toml_str("n_speakers = 1").is_err());
    assert!(SynthConfig::from_toml_str("no_such_field = 3").is_err());

    let head = HeadConfig::default();
    assert_eq!(HeadConfig::from_toml_str(&head.to_toml_string()).unwrap(), head);
}
