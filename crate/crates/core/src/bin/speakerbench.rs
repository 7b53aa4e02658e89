//! Command-line driver for the benchmark pipeline.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use speakerbench::corpus::{
    generate_synthetic, ingest_dir, read_canonical, split_speakers, synthetic_noun_lexicon, vocabulary, write_canonical,
    Corpus, RawFormat, Split, SplitAssignment, SplitRatios, SynthConfig,
};
use speakerbench::eval::{
    bootstrap, first_last_csv, first_last_experiment, parse_window_sizes, read_table, report_csv, report_markdown,
    significance_csv, sweep_csv, sweep_markdown, sweep_svg, sweep_utterances, BootstrapResult, BootstrapSettings,
    ComparisonRow, EvalRow, Metric, SweepPoint, Table, TestKind, WindowSize,
};
use speakerbench::head::{load_head, save_head, train_head_with_report, HeadConfig, HeadScorer};
use speakerbench::normalize::{prepare_corpus, Style};
use speakerbench::scoring::{
    fit_tfidf_with, load_embeddings, news_reference, read_scores, write_scores, Analyzer, Features, ScoreSet, Scorer,
    Similarity, VectorScorer,
};
use speakerbench::trials::{
    build_trials, read_lemma_sets, read_trials, trialset_report, write_stats_csv, write_trials, Difficulty,
    LemmaSource, NounLexicon, OverlapMode, TrialTargets,
};
use speakerbench::{Error, Result};

#[derive(Parser)]
#[command(name = "speakerbench", version, about = "Speaker verification benchmark on conversational transcripts")]
struct Cli {
    /// Cap on worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read raw transcripts (or a canonical file) into a canonical corpus.
    Ingest {
        #[arg(long, value_enum)]
        format: IngestFormat,
        /// Directory with calls.tsv and one <conversation_id>.txt per call, or a canonical file.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus.
    Synth {
        /// TOML synth config; the tuned benchmark configuration when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Trim introductions and normalize transcript text.
    Normalize {
        #[arg(long)]
        style: Option<Style>,
        #[arg(long, default_value_t = 5)]
        trim_intro: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build verification trials for one split and difficulty.
    BuildTrials(BuildTrialsArgs),
    /// Score trials with a baseline scorer or a trained head.
    Score {
        #[arg(long, value_enum)]
        scorer: ScorerKind,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        features: FeatureArgs,
        /// Head checkpoint (for --scorer head).
        #[arg(long)]
        head: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the MLP verification head on a trial file.
    TrainHead {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        features: FeatureArgs,
        /// TOML head config; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bootstrap metrics for one or more score files and compare them.
    Evaluate(EvaluateArgs),
    /// Utterance-count sweep or first/last window comparison.
    Ablate(AblateArgs),
    /// Render a report or sweep CSV.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Md)]
        format: ReportFormat,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum IngestFormat {
    Bbn,
    Ldc,
    Canonical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScorerKind {
    Tfidf,
    Char4,
    EmbedCos,
    EmbedNegeuc,
    Head,
}

impl ScorerKind {
    fn name(self) -> &'static str {
        match self {
            ScorerKind::Tfidf => "tfidf",
            ScorerKind::Char4 => "char4",
            ScorerKind::EmbedCos => "embed-cos",
            ScorerKind::EmbedNegeuc => "embed-negeuc",
            ScorerKind::Head => "head",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FeatureKind {
    Tfidf,
    Char4,
    Embeddings,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Md,
    Csv,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ablation {
    Sweep,
    Firstlast,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long, default_value = "0.5,0.25,0.25")]
    ratios: SplitRatios,
    /// Seed of the speaker split; keep it fixed across splits and difficulties.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
}

#[derive(Args)]
struct DataArgs {
    /// Canonical corpus the trial keys refer to.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    trials: PathBuf,
}

#[derive(Args)]
struct FeatureArgs {
    /// Side features for the head.
    #[arg(long, value_enum, default_value_t = FeatureKind::Tfidf)]
    features: FeatureKind,
    /// Reference text for TF-IDF fitting, one document per line; the bundled news sample when omitted.
    #[arg(long, conflicts_with = "reference_split")]
    reference: Option<PathBuf>,
    /// Fit TF-IDF on the sides of one split of the corpus instead.
    #[arg(long)]
    reference_split: Option<Split>,
    #[arg(long)]
    max_features: Option<usize>,
    /// Embedding manifest.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Args)]
struct BuildTrialsArgs {
    #[arg(long = "in", visible_alias = "corpus")]
    input: PathBuf,
    #[arg(long)]
    difficulty: Difficulty,
    #[arg(long)]
    split: Split,
    /// Trial sampling seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    splits: SplitArgs,
    /// Positive target; every eligible positive when omitted.
    #[arg(long)]
    positives: Option<usize>,
    /// Negative target; as many as positives when omitted.
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    max_per_speaker: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Noun-overlap statistics CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// `english`, `synthetic`, or a surface<TAB>lemma file.
    #[arg(long, default_value = "english")]
    lexicon: String,
    /// Precomputed `{key, lemmas}` lines that replace lexicon lookup.
    #[arg(long)]
    lemmas: Option<PathBuf>,
    #[arg(long, default_value = "jaccard")]
    overlap: OverlapMode,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, required = true)]
    scores: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "auc,eer")]
    metric: Vec<Metric>,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',')]
    compare: Vec<TestKind>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(value_enum)]
    kind: Ablation,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, required = true, value_delimiter = ',')]
    scorer: Vec<ScorerKind>,
    #[command(flatten)]
    features: FeatureArgs,
    #[arg(long)]
    head: Option<PathBuf>,
    #[arg(long, default_value = "25,75,135,full")]
    ks: String,
    #[arg(long, default_value_t = 50)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    min_len: usize,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest { format, input, out } => {
            let corpus = match format {
                IngestFormat::Bbn => ingest_dir(&input, RawFormat::Bbn)?,
                IngestFormat::Ldc => ingest_dir(&input, RawFormat::Ldc)?,
                IngestFormat::Canonical => read_canonical(&input)?,
            };
            info!("{} conversations, {} speakers", corpus.conversation_count(), corpus.speakers().len());
            write_canonical(&corpus, &out)
        }
        Command::Synth { config, seed, out } => {
            let mut cfg = match &config {
                Some(p) => SynthConfig::load(p)?,
                None => SynthConfig::benchmark(0),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let corpus = generate_synthetic(&cfg)?;
            info!("{} conversations, {} speakers", corpus.conversation_count(), corpus.speakers().len());
            write_canonical(&corpus, &out)
        }
        Command::Normalize {
            style,
            trim_intro,
            input,
            out,
        } => {
            let corpus = read_canonical(&input)?;
            let (prepared, stats) = prepare_corpus(&corpus, trim_intro, style)?;
            if stats.emptied_by_trim > 0 {
                warn!("{} sides had at most {trim_intro} utterances and are now empty", stats.emptied_by_trim);
            }
            write_canonical(&prepared, &out)
        }
        Command::BuildTrials(args) => build_trials_cmd(args),
        Command::Score {
            scorer,
            data,
            features,
            head,
            out,
        } => {
            let corpus = read_canonical(&data.corpus)?;
            let (trials, _) = read_trials(&data.trials)?;
            let scorer = make_scorer(scorer, &features, head.as_deref(), &corpus)?;
            let set = scorer.score(&trials, &corpus)?;
            report_score_warnings(&set);
            write_scores(&set, &out)
        }
        Command::TrainHead {
            data,
            features,
            config,
            out,
        } => {
            let corpus = read_canonical(&data.corpus)?;
            let (trials, _) = read_trials(&data.trials)?;
            let cfg = match &config {
                Some(p) => HeadConfig::load(p)?,
                None => HeadConfig::default(),
            };
            let source = make_features(features.features, &features, &corpus)?;
            let (head, report) = train_head_with_report(&trials, &corpus, &source, &cfg)?;
            info!(
                "trained {} epochs ({}), final loss {:.6}",
                report.epochs(),
                if report.converged { "converged" } else { "iteration limit" },
                report.loss_curve.last().copied().unwrap_or(f64::NAN)
            );
            save_head(&head, &out)
        }
        Command::Evaluate(args) => evaluate_cmd(args),
        Command::Ablate(args) => ablate_cmd(args),
        Command::Report { input, format, out } => {
            let table = read_table(&input)?;
            let text = match (&table, format) {
                (Table::Report(rows), ReportFormat::Md) => report_markdown(rows),
                (Table::Report(rows), ReportFormat::Csv) => report_csv(rows, &[])?,
                (Table::Report(_), ReportFormat::Svg) => {
                    return Err(Error::Config("svg output needs a sweep table".into()))
                }
                (Table::Sweep(points), ReportFormat::Md) => sweep_markdown(points),
                (Table::Sweep(points), ReportFormat::Csv) => sweep_csv(points, &[])?,
                (Table::Sweep(points), ReportFormat::Svg) => sweep_svg(points),
            };
            match out {
                Some(p) => fs::write(&p, text).map_err(|e| Error::io(&p, e)),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn assignment(corpus: &Corpus, split: &SplitArgs) -> Result<SplitAssignment> {
    split_speakers(corpus, split.ratios, split.split_seed)
}

fn build_trials_cmd(args: BuildTrialsArgs) -> Result<()> {
    let corpus = read_canonical(&args.input)?;
    let assignment = assignment(&corpus, &args.splits)?;
    let targets = TrialTargets {
        positives: args.positives,
        negatives: args.negatives,
        max_per_speaker: args.max_per_speaker,
    };
    let set = build_trials(&corpus, &assignment, args.split, args.difficulty, args.seed, targets)?;
    let st = &set.stats;
    info!(
        "{} positives (eligible {}), {} negatives (eligible {}), {} speakers",
        st.positives, st.eligible_positive, st.negatives, st.eligible_negative, st.speakers
    );
    if st.positive_shortfall() > 0 || st.negative_shortfall() > 0 {
        warn!(
            "shortfall: {} positives, {} negatives below target",
            st.positive_shortfall(),
            st.negative_shortfall()
        );
    }
    write_trials(&set, &args.out)?;
    if let Some(stats_path) = &args.stats {
        let source = match &args.lemmas {
            Some(p) => LemmaSource::Precomputed(read_lemma_sets(p)?),
            None => LemmaSource::Lexicon(lexicon(&args.lexicon, &corpus)?),
        };
        let report = trialset_report(&set.trials, &corpus, &source, args.overlap)?;
        let name = format!("{}-{}", args.split, args.difficulty);
        write_stats_csv(&[(name, report)], stats_path)?;
    }
    Ok(())
}

fn lexicon(spec: &str, corpus: &Corpus) -> Result<NounLexicon> {
    match spec {
        "english" => Ok(NounLexicon::english()),
        "synthetic" => {
            let n_topics = corpus
                .topics()
                .iter()
                .filter_map(|t| t.strip_prefix("topic_")?.parse::<usize>().ok())
                .max()
                .map_or(0, |m| m + 1);
            Ok(synthetic_noun_lexicon(&vocabulary(n_topics)))
        }
        path => NounLexicon::from_tsv(Path::new(path)),
    }
}

fn reference_docs(args: &FeatureArgs, corpus: &Corpus) -> Result<Vec<String>> {
    if let Some(split) = args.reference_split {
        let assignment = assignment(corpus, &args.split)?;
        return Ok(corpus
            .sides()
            .iter()
            .filter(|s| assignment.split_of(&s.speaker_id) == Some(split))
            .map(|s| s.text())
            .collect());
    }
    match &args.reference {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(text.lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect())
        }
        None => Ok(news_reference().into_iter().map(str::to_string).collect()),
    }
}

fn make_features(kind: FeatureKind, args: &FeatureArgs, corpus: &Corpus) -> Result<Features> {
    match kind {
        FeatureKind::Tfidf | FeatureKind::Char4 => {
            let analyzer = if kind == FeatureKind::Tfidf { Analyzer::Word } else { Analyzer::Char4 };
            let docs = reference_docs(args, corpus)?;
            Ok(Features::Tfidf(fit_tfidf_with(&docs, analyzer, args.max_features)?))
        }
        FeatureKind::Embeddings => {
            let path = args
                .embeddings
                .as_ref()
                .ok_or_else(|| Error::Config("embedding features need --embeddings".into()))?;
            Ok(Features::Embeddings(load_embeddings(path)?))
        }
    }
}

fn make_scorer(kind: ScorerKind, args: &FeatureArgs, head: Option<&Path>, corpus: &Corpus) -> Result<Box<dyn Scorer>> {
    let vector = |features, similarity| -> Box<dyn Scorer> {
        Box::new(VectorScorer::new(kind.name(), features, similarity))
    };
    Ok(match kind {
        ScorerKind::Tfidf => vector(make_features(FeatureKind::Tfidf, args, corpus)?, Similarity::Cosine),
        ScorerKind::Char4 => vector(make_features(FeatureKind::Char4, args, corpus)?, Similarity::Cosine),
        ScorerKind::EmbedCos => vector(make_features(FeatureKind::Embeddings, args, corpus)?, Similarity::Cosine),
        ScorerKind::EmbedNegeuc => {
            vector(make_features(FeatureKind::Embeddings, args, corpus)?, Similarity::NegEuclidean)
        }
        ScorerKind::Head => {
            let path = head.ok_or_else(|| Error::Config("--scorer head needs --head".into()))?;
            let features = make_features(args.features, args, corpus)?;
            Box::new(HeadScorer::new("head", load_head(path)?, features))
        }
    })
}

fn report_score_warnings(set: &ScoreSet) {
    if set.degenerate > 0 {
        warn!("{} trials involve a degenerate (zero) feature vector", set.degenerate);
    }
    for w in &set.warnings {
        warn!("{w}");
    }
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<()> {
    let sets = args.scores.iter().map(|p| read_scores(p)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    // boots[set][metric]
    let mut boots: Vec<Vec<BootstrapResult>> = Vec::new();
    for set in &sets {
        let (scores, labels) = (set.scores(), set.labels());
        let per_metric = args
            .metric
            .iter()
            .map(|&m| bootstrap(m, &scores, &labels, args.bootstrap, args.seed))
            .collect::<Result<Vec<_>>>()?;
        let get = |m: Metric| per_metric.iter().find(|b| b.metric == m);
        rows.push(EvalRow {
            model: set.scorer.clone(),
            encoding: set.encoding.clone().unwrap_or_else(|| "unknown".into()),
            difficulty: set.difficulty.map_or_else(|| "unknown".into(), |d| d.to_string()),
            n_trials: set.len(),
            auc: get(Metric::Auc).map(|b| b.mean),
            auc_se: get(Metric::Auc).map(|b| b.standard_error),
            eer: get(Metric::Eer).map(|b| b.mean),
            eer_se: get(Metric::Eer).map(|b| b.standard_error),
            resamples: args.bootstrap,
            seed: args.seed,
            redraws: per_metric.first().map_or(0, |b| b.redraws),
        });
        boots.push(per_metric);
    }
    let metrics: Vec<&str> = args.metric.iter().map(|m| m.as_str()).collect();
    let mut provenance = vec![
        ("command".to_string(), "evaluate".to_string()),
        ("metrics".to_string(), metrics.join(",")),
        ("bootstrap".to_string(), args.bootstrap.to_string()),
        ("seed".to_string(), args.seed.to_string()),
        ("single_class_resamples".to_string(), "redrawn and counted".to_string()),
    ];
    for p in &args.scores {
        provenance.push(("scores".to_string(), p.display().to_string()));
    }
    speakerbench::eval::write_report_csv(&rows, &provenance, &args.out)?;

    if sets.len() > 1 && !args.compare.is_empty() {
        let mut comparisons = Vec::new();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                check_paired(&sets[i], &sets[j], &args.scores[i], &args.scores[j])?;
                for (mi, metric) in args.metric.iter().enumerate() {
                    for &test in &args.compare {
                        comparisons.push(ComparisonRow {
                            model_a: sets[i].scorer.clone(),
                            model_b: sets[j].scorer.clone(),
                            metric: metric.to_string(),
                            result: test.run(&boots[i][mi].resample_values, &boots[j][mi].resample_values)?,
                        });
                    }
                }
            }
        }
        let tests: Vec<&str> = args.compare.iter().map(|t| t.as_str()).collect();
        provenance.push(("tests".to_string(), tests.join(",")));
        let path = significance_path(&args.out);
        let text = significance_csv(&comparisons, &provenance)?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

/// Bootstrap comparisons pair resample `i` of both models, which needs the
/// same trials with the same labels in the same order.
fn check_paired(a: &ScoreSet, b: &ScoreSet, pa: &Path, pb: &Path) -> Result<()> {
    let same = a.len() == b.len()
        && a.records
            .iter()
            .zip(&b.records)
            .all(|(x, y)| x.trial_id == y.trial_id && x.label == y.label);
    if same {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{} and {} do not score the same trials; comparisons need paired resamples",
            pa.display(),
            pb.display()
        )))
    }
}

fn significance_path(report: &Path) -> PathBuf {
    let stem = report.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    report.with_file_name(format!("{stem}.significance.csv"))
}

fn ablate_cmd(args: AblateArgs) -> Result<()> {
    let corpus = read_canonical(&args.data.corpus)?;
    let (trials, _) = read_trials(&args.data.trials)?;
    let scorers = args
        .scorer
        .iter()
        .map(|&k| make_scorer(k, &args.features, args.head.as_deref(), &corpus))
        .collect::<Result<Vec<_>>>()?;
    let boot = BootstrapSettings {
        resamples: args.bootstrap,
        seed: args.seed,
    };
    let names: Vec<String> = scorers.iter().map(|s| s.scorer_name()).collect();
    let mut provenance = vec![
        ("command".to_string(), "ablate".to_string()),
        ("scorers".to_string(), names.join(" ")),
        ("corpus".to_string(), args.data.corpus.display().to_string()),
        ("trials".to_string(), args.data.trials.display().to_string()),
        ("bootstrap".to_string(), args.bootstrap.to_string()),
        ("seed".to_string(), args.seed.to_string()),
    ];
    let text = match args.kind {
        Ablation::Sweep => {
            let ks: Vec<WindowSize> = parse_window_sizes(&args.ks)?;
            provenance.push(("ks".to_string(), args.ks.clone()));
            let mut points = Vec::new();
            for s in &scorers {
                for row in sweep_utterances(&trials, &corpus, s.as_ref(), &ks, boot)? {
                    if row.short_sides > 0 {
                        warn!("{}: {} sides shorter than {} kept whole", row.scorer, row.short_sides, row.window);
                    }
                    points.push(SweepPoint::from(&row));
                }
            }
            sweep_csv(&points, &provenance)?
        }
        Ablation::Firstlast => {
            let refs: Vec<&dyn Scorer> = scorers.iter().map(|s| s.as_ref()).collect();
            let result = first_last_experiment(&trials, &corpus, &refs, args.k, args.min_len, boot)?;
            if let Some(note) = &result.note {
                warn!("{note}");
            }
            first_last_csv(&result, &provenance)?
        }
    };
    fs::write(&args.out, text).map_err(|e| Error::io(&args.out, e))
}
