//! Config-driven pipeline commands chaining ingestion, classification,
//! embeddings, analytics, and regression into reproducible report
//! bundles.
//!
//! Every command is a pure function of (config, input files, seed):
//! reruns produce byte-identical outputs, and nothing is written outside
//! the configured output directory. Validation failures surface before
//! any output exists.

use std::collections::BTreeMap;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{
    adjust_irt, chi_square, flag_pirt, incentive_ratio, pearson, pirt_ratio, write_incentive_csv,
    write_ratio_csv, AnalyticsError, CarryMode, ChiSquareResult, ContingencyTable, KeywordRole,
    KeywordSet,
};
use crate::chart::{self, BarChart, LineChart, Series};
use crate::classifier::{evaluate, train_svm, EvalReport, Kernel, SvmError};
use crate::corpus::{
    assign_regions, ingest_posts, read_ili_csv, weekly_aggregate, CorpusError, Label, Post,
    PostFormat, Region, RegionMap, SeasonMap, WeeklySeries,
};
use crate::embeddings::{
    build_word_network, default_seed_tokens, export_embeddings, load_stoplist, train_sgns,
    write_network_csv, EmbedError, SgnsParams, DEFAULT_NETWORK_K,
};
use crate::features::{
    fit_feature_space, stratified_split, sweep_dimensions, transform_many, FeatureError, SweepEval,
    SweepRow,
};
use crate::gam::{
    run_model_suite, write_fitted_csv, write_suite_csv, GamError, ModelSpec, SuiteRow,
    DEFAULT_BASIS_DIM, RESPONSE_SCALE,
};
use crate::sentiment::{
    emoticon_frequency, exclude_neutral, filter_range, intensity_rows, score_posts,
    write_intensity_csv, IntensityMode, Polarity, SentimentError, SentimentLexicon,
};
use crate::text::{segment, EmoticonTable, Lexicon, SegmentOptions, TextError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
    #[error("missing input file: {path}")]
    MissingInput { path: PathBuf },
    #[error("config key {key}: {message}")]
    InvalidValue { key: String, message: String },
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("text: {0}")]
    Text(#[from] TextError),
    #[error("features: {0}")]
    Feature(#[from] FeatureError),
    #[error("classifier: {0}")]
    Svm(#[from] SvmError),
    #[error("embeddings: {0}")]
    Embed(#[from] EmbedError),
    #[error("sentiment: {0}")]
    Sentiment(#[from] SentimentError),
    #[error("analytics: {0}")]
    Analytics(#[from] AnalyticsError),
    #[error("regression: {0}")]
    Gam(#[from] GamError),
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// 1 for configuration/validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config { .. }
            | PipelineError::MissingInput { .. }
            | PipelineError::InvalidValue { .. } => 1,
            _ => 2,
        }
    }
}

/// Resolved pipeline configuration. Paths are absolute or relative to
/// the process working directory by the time this struct exists.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub posts: PathBuf,
    pub train: PathBuf,
    pub ili: PathBuf,
    pub lexicon: PathBuf,
    pub sentiment_words: PathBuf,
    pub degree_words: Option<PathBuf>,
    pub negation_words: Option<PathBuf>,
    pub emoticons: PathBuf,
    pub hospital_keywords: PathBuf,
    pub duration_keywords: PathBuf,
    pub region_map: PathBuf,
    pub season_map: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub seed_tokens: Option<PathBuf>,
    pub feature_grid: Vec<usize>,
    pub svm_c: f64,
    pub svm_tol: f64,
    pub kernel: Kernel,
    pub embed: SgnsParams,
    pub network_k: usize,
    pub basis_dim: usize,
    pub carry_mode: CarryMode,
    pub out: PathBuf,
    pub seed: u64,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub carry_mode: Option<CarryMode>,
}

/// The config file's raw shape: one flat table of documented keys.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    posts: String,
    train: String,
    ili: String,
    lexicon: String,
    sentiment_words: String,
    degree_words: Option<String>,
    negation_words: Option<String>,
    emoticons: String,
    hospital_keywords: String,
    duration_keywords: String,
    region_map: String,
    season_map: Option<String>,
    stoplist: Option<String>,
    seed_tokens: Option<String>,
    feature_grid: Option<Vec<usize>>,
    svm_c: Option<f64>,
    svm_tol: Option<f64>,
    kernel: Option<String>,
    rbf_gamma: Option<f64>,
    embed_dim: Option<usize>,
    embed_window: Option<usize>,
    embed_negatives: Option<usize>,
    embed_epochs: Option<usize>,
    embed_min_count: Option<u64>,
    embed_learning_rate: Option<f64>,
    network_k: Option<usize>,
    basis_dim: Option<usize>,
    carry_mode: Option<String>,
    out: Option<String>,
    seed: Option<u64>,
}

fn env_path(var: &str) -> Option<PathBuf> {
    env::var_os(var).map(PathBuf::from)
}

/// Loads, resolves, and validates a pipeline config. Relative paths in
/// the file resolve against the file's directory; FLUSIG_* environment
/// variables and then explicit overrides win over file values.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<PipelineConfig, PipelineError> {
    let body = fs::read_to_string(path).map_err(|_| PipelineError::MissingInput {
        path: path.to_path_buf(),
    })?;
    let raw: RawConfig = toml::from_str(&body).map_err(|e| PipelineError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &str| -> PathBuf { base.join(p) };
    let pick = |var: &str, file_value: Option<PathBuf>| -> Option<PathBuf> {
        env_path(var).or(file_value)
    };

    let kernel = match raw.kernel.as_deref().unwrap_or("rbf") {
        "linear" => Kernel::Linear,
        "rbf" => Kernel::Rbf {
            gamma: raw.rbf_gamma.unwrap_or(0.0),
        },
        other => {
            return Err(PipelineError::InvalidValue {
                key: "kernel".to_string(),
                message: format!("unknown kernel {other:?} (expected linear or rbf)"),
            })
        }
    };
    let carry_mode = match raw.carry_mode.as_deref() {
        None => CarryMode::default(),
        Some(s) => CarryMode::parse(s).ok_or_else(|| PipelineError::InvalidValue {
            key: "carry_mode".to_string(),
            message: format!("unknown carry mode {s:?} (expected add or move)"),
        })?,
    };
    let defaults = SgnsParams::default();
    let embed = SgnsParams {
        dim: raw.embed_dim.unwrap_or(defaults.dim),
        window: raw.embed_window.unwrap_or(defaults.window),
        negatives: raw.embed_negatives.unwrap_or(defaults.negatives),
        epochs: raw.embed_epochs.unwrap_or(defaults.epochs),
        min_count: raw.embed_min_count.unwrap_or(defaults.min_count),
        learning_rate: raw.embed_learning_rate.unwrap_or(defaults.learning_rate),
    };

    let out = overrides
        .out
        .clone()
        .or_else(|| env_path("FLUSIG_OUT"))
        .or_else(|| raw.out.as_deref().map(resolve))
        .unwrap_or_else(|| base.join("out"));

    let config = PipelineConfig {
        posts: pick("FLUSIG_POSTS", Some(resolve(&raw.posts))).expect("present"),
        train: pick("FLUSIG_TRAIN", Some(resolve(&raw.train))).expect("present"),
        ili: pick("FLUSIG_ILI", Some(resolve(&raw.ili))).expect("present"),
        lexicon: pick("FLUSIG_LEXICON", Some(resolve(&raw.lexicon))).expect("present"),
        sentiment_words: pick(
            "FLUSIG_SENTIMENT_WORDS",
            Some(resolve(&raw.sentiment_words)),
        )
        .expect("present"),
        degree_words: pick(
            "FLUSIG_DEGREE_WORDS",
            raw.degree_words.as_deref().map(resolve),
        ),
        negation_words: pick(
            "FLUSIG_NEGATION_WORDS",
            raw.negation_words.as_deref().map(resolve),
        ),
        emoticons: pick("FLUSIG_EMOTICONS", Some(resolve(&raw.emoticons))).expect("present"),
        hospital_keywords: pick(
            "FLUSIG_HOSPITAL_KEYWORDS",
            Some(resolve(&raw.hospital_keywords)),
        )
        .expect("present"),
        duration_keywords: pick(
            "FLUSIG_DURATION_KEYWORDS",
            Some(resolve(&raw.duration_keywords)),
        )
        .expect("present"),
        region_map: pick("FLUSIG_REGION_MAP", Some(resolve(&raw.region_map))).expect("present"),
        season_map: pick("FLUSIG_SEASON_MAP", raw.season_map.as_deref().map(resolve)),
        stoplist: pick("FLUSIG_STOPLIST", raw.stoplist.as_deref().map(resolve)),
        seed_tokens: pick(
            "FLUSIG_SEED_TOKENS",
            raw.seed_tokens.as_deref().map(resolve),
        ),
        feature_grid: raw
            .feature_grid
            .unwrap_or_else(|| vec![250, 500, 1000, 2000, 4000]),
        svm_c: raw.svm_c.unwrap_or(1.0),
        svm_tol: raw.svm_tol.unwrap_or(1e-3),
        kernel,
        embed,
        network_k: raw.network_k.unwrap_or(DEFAULT_NETWORK_K),
        basis_dim: raw.basis_dim.unwrap_or(DEFAULT_BASIS_DIM),
        carry_mode: overrides.carry_mode.unwrap_or(carry_mode),
        out,
        seed: overrides.seed.or(raw.seed).unwrap_or(0),
    };
    validate(&config)?;
    Ok(config)
}

fn validate(config: &PipelineConfig) -> Result<(), PipelineError> {
    let required = [
        &config.posts,
        &config.train,
        &config.ili,
        &config.lexicon,
        &config.sentiment_words,
        &config.emoticons,
        &config.hospital_keywords,
        &config.duration_keywords,
        &config.region_map,
    ];
    let optional = [
        &config.degree_words,
        &config.negation_words,
        &config.season_map,
        &config.stoplist,
        &config.seed_tokens,
    ];
    for path in required {
        if !path.is_file() {
            return Err(PipelineError::MissingInput { path: path.clone() });
        }
    }
    for path in optional.into_iter().flatten() {
        if !path.is_file() {
            return Err(PipelineError::MissingInput { path: path.clone() });
        }
    }

    let positive = |key: &str, v: f64| -> Result<(), PipelineError> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(PipelineError::InvalidValue {
                key: key.to_string(),
                message: format!("must be positive and finite, got {v}"),
            })
        }
    };
    if config.feature_grid.is_empty() || config.feature_grid.contains(&0) {
        return Err(PipelineError::InvalidValue {
            key: "feature_grid".to_string(),
            message: "must be a non-empty list of positive sizes".to_string(),
        });
    }
    positive("svm_c", config.svm_c)?;
    positive("svm_tol", config.svm_tol)?;
    positive("embed_learning_rate", config.embed.learning_rate)?;
    for (key, v) in [
        ("embed_dim", config.embed.dim),
        ("embed_window", config.embed.window),
        ("embed_epochs", config.embed.epochs),
        ("network_k", config.network_k),
    ] {
        if v == 0 {
            return Err(PipelineError::InvalidValue {
                key: key.to_string(),
                message: "must be at least 1".to_string(),
            });
        }
    }
    if config.basis_dim < 3 {
        return Err(PipelineError::InvalidValue {
            key: "basis_dim".to_string(),
            message: format!("must be at least 3, got {}", config.basis_dim),
        });
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), PipelineError> {
    let mut body = serde_json::to_string_pretty(value).expect("serializable");
    body.push('\n');
    fs::write(path, body).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_text(body: &str, path: &Path) -> Result<(), PipelineError> {
    fs::write(path, body).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn prepare_out(config: &PipelineConfig) -> Result<PathBuf, PipelineError> {
    let charts = config.out.join("charts");
    fs::create_dir_all(&charts).map_err(|source| PipelineError::Io {
        path: charts.display().to_string(),
        source,
    })?;
    Ok(config.out.clone())
}

fn season_map(config: &PipelineConfig) -> Result<SeasonMap, PipelineError> {
    Ok(match &config.season_map {
        Some(path) => SeasonMap::from_file(path)?,
        None => SeasonMap::default(),
    })
}

fn gather<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

fn resolve_kernel(kernel: Kernel, dim: usize) -> Kernel {
    match kernel {
        Kernel::Rbf { gamma } if gamma <= 0.0 => Kernel::Rbf {
            gamma: 1.0 / dim.max(1) as f64,
        },
        other => other,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyOutcome {
    pub best_k: usize,
    pub selected_dim: usize,
    pub sweep: Vec<SweepRow>,
    pub holdout: EvalReport,
    pub train_posts: usize,
    pub train_skipped: usize,
    pub train_unlabeled: usize,
    pub corpus_posts: usize,
    pub corpus_skipped: usize,
    pub influenza_posts: usize,
}

/// Trains the feature sweep and SVM on the labeled corpus, evaluates on
/// a stratified hold-out, then labels the full corpus.
pub fn cmd_classify(config: &PipelineConfig) -> Result<ClassifyOutcome, PipelineError> {
    let lexicon = Lexicon::from_file(&config.lexicon)?;
    let opts = SegmentOptions::default();

    let train_ingest = ingest_posts(&config.train, PostFormat::Jsonl)?;
    for skip in &train_ingest.skipped {
        log::warn!("train line {} skipped: {}", skip.line, skip.reason);
    }
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    let mut unlabeled = 0usize;
    for post in &train_ingest.posts {
        match post.label {
            Label::Unlabeled => unlabeled += 1,
            label => {
                docs.push(segment(&post.text, &lexicon, opts));
                labels.push(label == Label::Influenza);
            }
        }
    }
    if unlabeled > 0 {
        log::warn!("{unlabeled} training posts lack labels and were ignored");
    }

    let eval_params = SweepEval {
        test_fraction: 0.2,
        seed: config.seed,
        kernel: config.kernel,
        c: config.svm_c,
        tol: config.svm_tol,
    };
    let sweep = sweep_dimensions(&docs, &labels, &config.feature_grid, &eval_params)?;

    // hold-out metrics at the chosen size
    let (train_idx, test_idx) = stratified_split(&labels, 0.2, config.seed);
    let fold_docs = gather(&docs, &train_idx);
    let fold_labels = gather(&labels, &train_idx);
    let fold_space = fit_feature_space(&fold_docs, &fold_labels, sweep.best_k)?;
    let fold_model = train_svm(
        &transform_many(&fold_docs, &fold_space),
        &fold_labels,
        resolve_kernel(config.kernel, fold_space.dim()),
        config.svm_c,
        config.svm_tol,
    )?;
    let holdout = evaluate(
        &fold_model,
        &transform_many(&gather(&docs, &test_idx), &fold_space),
        &gather(&labels, &test_idx),
    )?;

    // final artifacts are trained on every labeled post
    let space = fit_feature_space(&docs, &labels, sweep.best_k)?;
    let model = train_svm(
        &transform_many(&docs, &space),
        &labels,
        resolve_kernel(config.kernel, space.dim()),
        config.svm_c,
        config.svm_tol,
    )?;

    let ingest = ingest_posts(&config.posts, PostFormat::Jsonl)?;
    for skip in &ingest.skipped {
        log::warn!("posts line {} skipped: {}", skip.line, skip.reason);
    }
    let region_map = RegionMap::from_file(&config.region_map)?;
    let mut posts = assign_regions(&ingest.posts, &region_map)?;
    for post in &mut posts {
        post.tokens = segment(&post.text, &lexicon, opts);
    }
    let labeled = crate::classifier::label_corpus(&model, &posts, &space)?;
    let influenza = labeled
        .iter()
        .filter(|p| p.label == Label::Influenza)
        .count();

    let out = prepare_out(config)?;
    crate::corpus::write_posts_jsonl(&out.join("labeled.jsonl"), &labeled)?;
    model.save(&out.join("svm_model.txt"))?;
    space.save(&out.join("feature_space.txt"))?;
    let outcome = ClassifyOutcome {
        best_k: sweep.best_k,
        selected_dim: space.dim(),
        sweep: sweep.rows,
        holdout,
        train_posts: docs.len(),
        train_skipped: train_ingest.skipped.len(),
        train_unlabeled: unlabeled,
        corpus_posts: labeled.len(),
        corpus_skipped: ingest.skipped.len(),
        influenza_posts: influenza,
    };
    write_json(&outcome, &out.join("classifier_metrics.json"))?;
    Ok(outcome)
}

/// Returns the labeled corpus, running the classify stage first when its
/// output is not in the output directory yet.
fn ensure_labeled(config: &PipelineConfig) -> Result<Vec<Post>, PipelineError> {
    let path = config.out.join("labeled.jsonl");
    if !path.is_file() {
        cmd_classify(config)?;
    }
    Ok(ingest_posts(&path, PostFormat::Jsonl)?.posts)
}

fn influenza_posts(labeled: Vec<Post>) -> Vec<Post> {
    labeled
        .into_iter()
        .filter(|p| p.label == Label::Influenza)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbedOutcome {
    pub north_posts: usize,
    pub south_posts: usize,
    pub north_vocab: usize,
    pub south_vocab: usize,
    pub networks: usize,
    pub missing_seeds: Vec<String>,
}

/// Trains one embedding model per region on influenza posts and writes
/// the cross-region word networks.
pub fn cmd_embed(config: &PipelineConfig) -> Result<EmbedOutcome, PipelineError> {
    let posts = influenza_posts(ensure_labeled(config)?);
    let split = |region: Region| -> Vec<Vec<String>> {
        posts
            .iter()
            .filter(|p| p.region == Some(region))
            .map(|p| p.tokens.clone())
            .collect()
    };
    let north_sentences = split(Region::North);
    let south_sentences = split(Region::South);

    let north = train_sgns(&north_sentences, &config.embed, config.seed)?;
    let south = train_sgns(&south_sentences, &config.embed, config.seed.wrapping_add(1))?;

    let seeds = match &config.seed_tokens {
        Some(path) => {
            let body = fs::read_to_string(path).map_err(|source| PipelineError::Io {
                path: path.display().to_string(),
                source,
            })?;
            body.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect()
        }
        None => default_seed_tokens(),
    };
    let stoplist = match &config.stoplist {
        Some(path) => load_stoplist(path)?,
        None => Default::default(),
    };

    let networks = build_word_network(&seeds, &north, &south, config.network_k, &stoplist);

    let out = prepare_out(config)?;
    export_embeddings(&north, &out.join("embeddings_north.txt"))?;
    export_embeddings(&south, &out.join("embeddings_south.txt"))?;
    write_network_csv(&networks.networks, &out.join("word_network.csv"))?;
    let outcome = EmbedOutcome {
        north_posts: north_sentences.len(),
        south_posts: south_sentences.len(),
        north_vocab: north.len(),
        south_vocab: south.len(),
        networks: networks.networks.len(),
        missing_seeds: networks.missing_seeds,
    };
    write_json(&outcome, &out.join("embed_summary.json"))?;
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationRow {
    pub region: Region,
    pub series: String,
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiSummary {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeOutcome {
    pub influenza_posts: usize,
    pub scored_posts: usize,
    pub incentive_cells: usize,
    pub intensity_cells: usize,
    pub chi_square: Option<ChiSummary>,
    pub correlations: Vec<CorrelationRow>,
}

/// One contingency cell as written to CSV: region, polarity, count.
type PolarityCells = Vec<(String, String, u64)>;

fn polarity_table(
    scored: &[crate::sentiment::ScoredPost],
) -> Option<(ContingencyTable, PolarityCells)> {
    let mut counts: BTreeMap<(Region, Polarity), u64> = BTreeMap::new();
    for post in scored {
        *counts
            .entry((post.region, post.score.polarity))
            .or_insert(0) += 1;
    }
    let polarities = [Polarity::Positive, Polarity::Negative, Polarity::Neutral];
    let kept: Vec<Polarity> = polarities
        .into_iter()
        .filter(|p| {
            Region::BOTH
                .iter()
                .any(|r| counts.get(&(*r, *p)).copied().unwrap_or(0) > 0)
        })
        .collect();
    if kept.len() < 2 {
        return None;
    }
    let rows: Vec<Vec<u64>> = Region::BOTH
        .iter()
        .map(|r| {
            kept.iter()
                .map(|p| counts.get(&(*r, *p)).copied().unwrap_or(0))
                .collect()
        })
        .collect();
    if rows.iter().any(|row| row.iter().all(|&c| c == 0)) {
        return None;
    }
    let mut cells = Vec::new();
    for (r, region) in Region::BOTH.iter().enumerate() {
        for (c, polarity) in kept.iter().enumerate() {
            cells.push((region.to_string(), polarity.to_string(), rows[r][c]));
        }
    }
    let table = ContingencyTable::new(
        Region::BOTH.iter().map(|r| r.to_string()).collect(),
        kept.iter().map(|p| p.to_string()).collect(),
        rows,
    )
    .ok()?;
    Some((table, cells))
}

fn weekly_chart(series: &WeeklySeries) -> LineChart {
    // both signals min-max scaled so one frame can hold them
    let scale = |values: &[f64]| -> Vec<(f64, f64)> {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = (hi - lo).max(1e-12);
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as f64, (v - lo) / span))
            .collect()
    };
    let irt: Vec<f64> = series.irt.iter().map(|&v| v as f64).collect();
    let step = (series.len() / 6).max(1);
    LineChart {
        title: format!("{} weekly signal and incidence (scaled)", series.region),
        x_label: "week".to_string(),
        y_label: "scaled value".to_string(),
        series: vec![
            Series {
                name: "posts".to_string(),
                points: scale(&irt),
            },
            Series {
                name: "ILI%".to_string(),
                points: scale(&series.ili),
            },
        ],
        x_ticks: series
            .weeks
            .iter()
            .enumerate()
            .step_by(step)
            .map(|(i, w)| (i as f64, w.to_string()))
            .collect(),
    }
}

/// Produces the analytics bundle: treatment incentives, the polarity
/// contingency test, sentiment intensity, emoticon usage, prolonged-post
/// ratios, and signal/incidence correlations, with charts.
pub fn cmd_analyze(config: &PipelineConfig) -> Result<AnalyzeOutcome, PipelineError> {
    let posts = influenza_posts(ensure_labeled(config)?);
    let seasons = season_map(config)?;
    let sentiment = SentimentLexicon::from_files(
        &config.sentiment_words,
        config.degree_words.as_deref(),
        config.negation_words.as_deref(),
    )?;
    let emoticon_table = EmoticonTable::from_file(&config.emoticons)?;
    let hospital = KeywordSet::from_file(KeywordRole::Hospital, &config.hospital_keywords)?;
    let duration = KeywordSet::from_file(KeywordRole::Duration, &config.duration_keywords)?;
    let out = prepare_out(config)?;

    // treatment incentives per region and season
    let incentives = incentive_ratio(&posts, &hospital, &seasons)?;
    write_incentive_csv(&incentives, &out.join("incentive.csv"))?;

    // sentiment: polarity counts (with neutral) feed the contingency
    // test; intensity means exclude neutral
    let scored = filter_range(score_posts(&posts, &sentiment, &seasons)?);
    let chi = match polarity_table(&scored) {
        Some((table, cells)) => {
            let result: ChiSquareResult = chi_square(&table)?;
            let mut csv = String::from("region,polarity,observed,expected\n");
            for (i, (region, polarity, observed)) in cells.iter().enumerate() {
                let expected =
                    result.expected[i / result.expected[0].len()][i % result.expected[0].len()];
                csv.push_str(&format!("{region},{polarity},{observed},{expected}\n"));
            }
            write_text(&csv, &out.join("chi_square.csv"))?;
            let summary = ChiSummary {
                statistic: result.statistic,
                dof: result.dof,
                p_value: result.p_value,
            };
            write_json(&summary, &out.join("chi_square.json"))?;
            Some(summary)
        }
        None => {
            log::warn!("not enough polarity classes for a contingency test");
            None
        }
    };
    let nonneutral = exclude_neutral(scored.clone());
    let intensity = intensity_rows(&nonneutral);
    write_intensity_csv(&intensity, &out.join("sentiment_intensity.csv"))?;

    // emoticon usage per region and the north/south rate
    let emoticons = emoticon_frequency(&posts, &emoticon_table)?;
    let mut csv = String::from("region,category,per_post\n");
    for ((region, category), value) in &emoticons.frequency {
        csv.push_str(&format!("{region},{category},{value}\n"));
    }
    write_text(&csv, &out.join("emoticon_frequency.csv"))?;
    let mut csv = String::from("category,north_to_south\n");
    for (category, value) in &emoticons.rate {
        csv.push_str(&format!("{category},{value}\n"));
    }
    write_text(&csv, &out.join("emoticon_rates.csv"))?;

    // weekly series per region: prolonged ratios and correlations
    let ili = read_ili_csv(&config.ili)?;
    let mut correlations = Vec::new();
    for region in Region::BOTH {
        let series = weekly_aggregate(&posts, &ili, region, |p| flag_pirt(p, &duration))?;
        let ratios = pirt_ratio(&series);
        write_ratio_csv(&ratios, &out.join(format!("pirt_ratio_{region}.csv")))?;
        let adjusted = adjust_irt(&series, config.carry_mode);

        let irt: Vec<f64> = series.irt.iter().map(|&v| v as f64).collect();
        let pirt: Vec<f64> = series.pirt.iter().map(|&v| v as f64).collect();
        let adj: Vec<f64> = adjusted
            .adjusted_irt
            .as_ref()
            .expect("adjust_irt fills the field")
            .iter()
            .map(|&v| v as f64)
            .collect();
        for (name, values) in [
            ("posts_vs_ili", &irt),
            ("prolonged_vs_ili", &pirt),
            ("adjusted_vs_ili", &adj),
        ] {
            match pearson(values, &series.ili) {
                Ok(c) => correlations.push(CorrelationRow {
                    region,
                    series: name.to_string(),
                    r: c.r,
                    p_value: c.p_value,
                    n: c.n,
                }),
                Err(e) => log::warn!("{region} {name}: correlation skipped: {e}"),
            }
        }
        chart::write_line_chart(
            &weekly_chart(&series),
            &out.join(format!("charts/weekly_{region}.svg")),
        )?;
    }
    let mut csv = String::from("region,series,r,p_value,n\n");
    for row in &correlations {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.region, row.series, row.r, row.p_value, row.n
        ));
    }
    write_text(&csv, &out.join("correlation.csv"))?;

    // intensity and emoticon charts
    let bars: Vec<(String, f64)> = intensity
        .iter()
        .filter(|r| r.mode == IntensityMode::Absolute)
        .map(|r| (format!("{}/{}", r.region, r.season), r.value))
        .collect();
    chart::write_bar_chart(
        &BarChart {
            title: "mean sentiment intensity by region and season".to_string(),
            y_label: "mean |score|".to_string(),
            bars,
        },
        &out.join("charts/sentiment_intensity.svg"),
    )?;
    let bars: Vec<(String, f64)> = emoticons
        .rate
        .iter()
        .map(|(c, v)| (c.to_string(), *v))
        .collect();
    chart::write_bar_chart(
        &BarChart {
            title: "emoticon usage, north relative to south".to_string(),
            y_label: "rate".to_string(),
            bars,
        },
        &out.join("charts/emoticon_rates.svg"),
    )?;

    let outcome = AnalyzeOutcome {
        influenza_posts: posts.len(),
        scored_posts: scored.len(),
        incentive_cells: incentives.len(),
        intensity_cells: intensity.len(),
        chi_square: chi,
        correlations,
    };
    write_json(&outcome, &out.join("analyze_summary.json"))?;
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressOutcome {
    pub rows: Vec<SuiteRow>,
}

fn adjustment_chart(
    region: Region,
    fits: &[(Region, ModelSpec, crate::gam::GamFit)],
) -> Option<LineChart> {
    let find = |spec: ModelSpec| {
        fits.iter()
            .find(|(r, s, _)| *r == region && *s == spec)
            .map(|(_, _, f)| f)
    };
    let smooth_lag = find(ModelSpec::SmoothLag)?;
    let adjusted = find(ModelSpec::AdjustedSmoothLag)?;
    let percent = |values: &[f64]| -> Vec<(f64, f64)> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as f64, v / RESPONSE_SCALE))
            .collect()
    };
    let step = (smooth_lag.weeks.len() / 6).max(1);
    Some(LineChart {
        title: format!("{region} fitted incidence before and after adjustment"),
        x_label: "week".to_string(),
        y_label: "ILI%".to_string(),
        series: vec![
            Series {
                name: "observed".to_string(),
                points: percent(&smooth_lag.observed),
            },
            Series {
                name: "fitted (raw signal)".to_string(),
                points: percent(&smooth_lag.fitted),
            },
            Series {
                name: "fitted (adjusted signal)".to_string(),
                points: percent(&adjusted.fitted),
            },
        ],
        x_ticks: smooth_lag
            .weeks
            .iter()
            .enumerate()
            .step_by(step)
            .map(|(i, w)| (i as f64, w.to_string()))
            .collect(),
    })
}

/// Builds both regions' weekly series, fits the four model forms each,
/// and writes the suite table, fitted curves, and adjustment overlays.
pub fn cmd_regress(config: &PipelineConfig) -> Result<RegressOutcome, PipelineError> {
    let posts = influenza_posts(ensure_labeled(config)?);
    let duration = KeywordSet::from_file(KeywordRole::Duration, &config.duration_keywords)?;
    let ili = read_ili_csv(&config.ili)?;

    let mut series = Vec::new();
    for region in Region::BOTH {
        let weekly = weekly_aggregate(&posts, &ili, region, |p| flag_pirt(p, &duration))?;
        series.push(adjust_irt(&weekly, config.carry_mode));
    }
    let suite = run_model_suite(&series[0], &series[1], config.basis_dim)?;

    let out = prepare_out(config)?;
    write_suite_csv(&suite, &out.join("model_suite.csv"))?;
    for (region, spec, fit) in &suite.fits {
        write_fitted_csv(fit, &out.join(format!("fitted_{region}_{spec}.csv")))?;
    }
    for region in Region::BOTH {
        if let Some(chart) = adjustment_chart(region, &suite.fits) {
            chart::write_line_chart(&chart, &out.join(format!("charts/adjustment_{region}.svg")))?;
        }
    }
    let outcome = RegressOutcome { rows: suite.rows };
    write_json(&outcome, &out.join("regress_summary.json"))?;
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportOutcome {
    pub classify: ClassifyOutcome,
    pub embed: EmbedOutcome,
    pub analyze: AnalyzeOutcome,
    pub regress: RegressOutcome,
}

/// Runs the whole pipeline: classify, embed, analyze, regress.
pub fn cmd_report(config: &PipelineConfig) -> Result<ReportOutcome, PipelineError> {
    let classify = cmd_classify(config)?;
    let embed = cmd_embed(config)?;
    let analyze = cmd_analyze(config)?;
    let regress = cmd_regress(config)?;
    Ok(ReportOutcome {
        classify,
        embed,
        analyze,
        regress,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureSummary {
    pub dir: String,
    pub posts: usize,
    pub train: usize,
    pub weeks: usize,
}

/// Writes a complete synthetic dataset plus a ready-to-run config into
/// `dir`: an unlabeled corpus, a labeled training corpus, an aligned
/// weekly incidence file whose mean tracks the corpus signal, and every
/// dictionary the pipeline consumes. Same seed, same bytes.
pub fn write_fixture_set(
    dir: &Path,
    seed: u64,
    n_posts: usize,
    n_train: usize,
) -> Result<FixtureSummary, PipelineError> {
    use crate::corpus::synth::{
        default_region_map, demo_degree_entries, demo_emoticon_entries, demo_negation_entries,
        demo_sentiment_entries, seed_tokens, synth_corpus, synth_ili, IliParams, SynthSpec,
    };
    use crate::corpus::{write_ili_csv, write_posts_jsonl, IliRecord, Week};

    fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let spec = SynthSpec {
        n_posts: n_posts + n_train,
        ..SynthSpec::default()
    };
    let all = synth_corpus(&spec, seed);

    // the pipeline re-derives regions and tokens itself, so the stored
    // feeds carry neither
    let strip = |post: &Post, keep_label: bool| -> Post {
        let mut out = post.clone();
        out.region = None;
        out.tokens = Vec::new();
        if !keep_label {
            out.label = Label::Unlabeled;
        }
        out
    };
    let train: Vec<Post> = all[..n_train].iter().map(|p| strip(p, true)).collect();
    let corpus: Vec<Post> = all[n_train..].iter().map(|p| strip(p, false)).collect();
    write_posts_jsonl(&dir.join("train.jsonl"), &train)?;
    write_posts_jsonl(&dir.join("posts.jsonl"), &corpus)?;

    // incidence generated from the unlabeled corpus's true weekly signal,
    // with the prolonged share carried into the following week
    let weeks = spec.weeks();
    let index: BTreeMap<Week, usize> = weeks.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let duration = KeywordSet::duration_demo();
    let mut records = Vec::new();
    for (offset, region) in [(101u64, Region::North), (102, Region::South)] {
        let mut irt = vec![0u32; weeks.len()];
        let mut pirt = vec![0u32; weeks.len()];
        for (truth, stored) in all[n_train..].iter().zip(&corpus) {
            if truth.label == Label::Influenza && truth.region == Some(region) {
                let i = index[&truth.week()];
                irt[i] += 1;
                if duration.matches(&stored.text) {
                    pirt[i] += 1;
                }
            }
        }
        let ili = synth_ili(
            &irt,
            &pirt,
            &IliParams::default(),
            seed.wrapping_add(offset),
        );
        records.extend(weeks.iter().zip(ili).map(|(&week, ili_pct)| IliRecord {
            week,
            region,
            ili_pct,
        }));
    }
    write_ili_csv(&dir.join("ili.csv"), &records)?;

    let lines = |items: &[String]| items.join("\n") + "\n";
    write_text(&lines(&spec.lexicon_entries()), &dir.join("lexicon.txt"))?;

    let weighted = |entries: &[(&str, f64)]| -> String {
        entries.iter().map(|(w, s)| format!("{w}\t{s}\n")).collect()
    };
    write_text(
        &weighted(&demo_sentiment_entries()),
        &dir.join("sentiment.tsv"),
    )?;
    write_text(&weighted(&demo_degree_entries()), &dir.join("degree.tsv"))?;
    write_text(
        &(demo_negation_entries().join("\n") + "\n"),
        &dir.join("negation.txt"),
    )?;
    let emoticons: String = demo_emoticon_entries()
        .iter()
        .map(|(lit, cat)| format!("{lit}\t{cat}\n"))
        .collect();
    write_text(&emoticons, &dir.join("emoticons.tsv"))?;

    write_text(
        &lines(&crate::corpus::synth::hospital_phrases()),
        &dir.join("hospital.txt"),
    )?;
    write_text(
        &lines(&crate::corpus::synth::duration_phrases()),
        &dir.join("duration.txt"),
    )?;

    let regions: String = default_region_map()
        .iter()
        .map(|(province, region)| format!("{province}\t{region}\n"))
        .collect();
    write_text(&regions, &dir.join("region_map.tsv"))?;
    let seasons_map = SeasonMap::default();
    let seasons: String = (1..=12)
        .map(|m| format!("{m}\t{}\n", seasons_map.season_of_month(m)))
        .collect();
    write_text(&seasons, &dir.join("season_map.tsv"))?;

    let stoplist: Vec<String> = spec.shared_tokens.iter().take(3).cloned().collect();
    write_text(&lines(&stoplist), &dir.join("stoplist.txt"))?;
    write_text(&lines(&seed_tokens()), &dir.join("seeds.txt"))?;

    let config = format!(
        r#"# flusig pipeline configuration
# Relative paths resolve against this file's directory.
# FLUSIG_* environment variables may override any path key.

# inputs
posts = "posts.jsonl"              # unlabeled corpus (JSONL)
train = "train.jsonl"              # labeled training corpus (JSONL)
ili = "ili.csv"                    # weekly incidence: week,region,ili_pct
lexicon = "lexicon.txt"            # segmentation lexicon, one entry per line
sentiment_words = "sentiment.tsv"  # word<TAB>strength
degree_words = "degree.tsv"        # adverb<TAB>multiplier
negation_words = "negation.txt"    # one negation word per line
emoticons = "emoticons.tsv"        # [literal]<TAB>category
hospital_keywords = "hospital.txt" # treatment phrases, one per line
duration_keywords = "duration.txt" # prolonged-duration phrases, one per line
region_map = "region_map.tsv"      # province<TAB>north|south
season_map = "season_map.tsv"      # month<TAB>season
stoplist = "stoplist.txt"          # tokens pruned from word networks
seed_tokens = "seeds.txt"          # query tokens for word networks

# classifier
feature_grid = [30, 50, 80]        # feature-count sweep
svm_c = 1.0
svm_tol = 0.001
kernel = "rbf"                     # rbf | linear
rbf_gamma = 0.0                    # 0 means 1/dimension

# embeddings
embed_dim = 32
embed_window = 3
embed_negatives = 4
embed_epochs = 3
embed_min_count = 2
embed_learning_rate = 0.025
network_k = 12                     # neighbors per seed token

# regression
basis_dim = 10                     # spline basis size
carry_mode = "add"                 # add | move

# run
out = "out"                        # output directory
seed = {seed}
"#
    );
    write_text(&config, &dir.join("config.toml"))?;

    Ok(FixtureSummary {
        dir: dir.display().to_string(),
        posts: corpus.len(),
        train: train.len(),
        weeks: weeks.len(),
    })
}
