//! Skip-gram word embeddings with negative sampling, trained
//! independently per region; similarity queries and seed-word networks
//! annotated by which region's neighborhood a word belongs to.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("vocabulary is empty after min-count filtering")]
    EmptyVocabulary,
    #[error("token {token:?} not in vocabulary")]
    OutOfVocabulary { token: String },
    #[error("parameter {name} must be positive, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SgnsParams {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub learning_rate: f64,
}

impl Default for SgnsParams {
    fn default() -> SgnsParams {
        SgnsParams {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            min_count: 5,
            learning_rate: 0.025,
        }
    }
}

/// Trained embedding space. Similarity is measured on input vectors.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    input: Vec<Vec<f64>>,
    output: Vec<Vec<f64>>,
    params: SgnsParams,
    seed: u64,
    epoch_loss: Vec<f64>,
}

impl EmbeddingModel {
    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.input[i].as_slice())
    }

    /// The token's context-side (output) vector.
    pub fn context_vector(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.output[i].as_slice())
    }

    pub fn count(&self, token: &str) -> Option<u64> {
        self.index.get(token).map(|&i| self.counts[i])
    }

    /// Mean pair loss per epoch, in training order.
    pub fn epoch_loss(&self) -> &[f64] {
        &self.epoch_loss
    }

    pub fn params(&self) -> &SgnsParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(sigmoid(x)), stable for large |x|.
fn ln_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

/// Loss of one training example: one positive context and a batch of
/// negative samples against a shared center vector.
/// `L = -ln s(u_pos . v) - sum_n ln s(-u_n . v)`.
pub fn pair_loss(center: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    let mut loss = -ln_sigmoid(dot(center, positive));
    for u in negatives {
        loss += -ln_sigmoid(-dot(center, u));
    }
    loss
}

/// Analytic gradients of [`pair_loss`] with respect to every vector,
/// all evaluated at the same point.
#[derive(Debug, Clone)]
pub struct PairGradients {
    pub loss: f64,
    pub center: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn pair_gradients(center: &[f64], positive: &[f64], negatives: &[&[f64]]) -> PairGradients {
    let mut grad_center = vec![0.0; center.len()];
    let dp = dot(center, positive);
    let mut loss = -ln_sigmoid(dp);
    let e = sigmoid(dp) - 1.0;
    let grad_positive: Vec<f64> = center.iter().map(|c| e * c).collect();
    for (g, u) in grad_center.iter_mut().zip(positive) {
        *g += e * u;
    }
    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for u in negatives {
        let d = dot(center, u);
        loss += -ln_sigmoid(-d);
        let e = sigmoid(d);
        grad_negatives.push(center.iter().map(|c| e * c).collect());
        for (g, uu) in grad_center.iter_mut().zip(*u) {
            *g += e * uu;
        }
    }
    PairGradients {
        loss,
        center: grad_center,
        positive: grad_positive,
        negatives: grad_negatives,
    }
}

/// Trains skip-gram embeddings on tokenized sentences. Single-threaded
/// and fully deterministic under a fixed seed: the vocabulary is
/// ordered by descending count then token, and all sampling comes from
/// one seeded stream. The learning rate decays linearly per processed
/// center token down to 1e-4 of its initial value.
pub fn train_sgns(
    sentences: &[Vec<String>],
    params: &SgnsParams,
    seed: u64,
) -> Result<EmbeddingModel, EmbedError> {
    let positive = |name: &'static str, value: f64| {
        if value > 0.0 {
            Ok(())
        } else {
            Err(EmbedError::InvalidParameter { name, value })
        }
    };
    positive("dim", params.dim as f64)?;
    positive("window", params.window as f64)?;
    positive("epochs", params.epochs as f64)?;
    positive("learning_rate", params.learning_rate)?;

    let mut raw_counts: BTreeMap<&str, u64> = BTreeMap::new();
    for sentence in sentences {
        for token in sentence {
            *raw_counts.entry(token).or_insert(0) += 1;
        }
    }
    let mut ordered: Vec<(&str, u64)> = raw_counts
        .into_iter()
        .filter(|&(_, c)| c >= params.min_count)
        .collect();
    ordered.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if ordered.is_empty() {
        return Err(EmbedError::EmptyVocabulary);
    }

    let vocab: Vec<String> = ordered.iter().map(|(t, _)| t.to_string()).collect();
    let counts: Vec<u64> = ordered.iter().map(|&(_, c)| c).collect();
    let index: HashMap<String, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();

    // noise distribution: unigram counts raised to 0.75
    let mut cum = Vec::with_capacity(counts.len());
    let mut total = 0.0;
    for &c in &counts {
        total += (c as f64).powf(0.75);
        cum.push(total);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = params.dim;
    let mut input: Vec<Vec<f64>> = (0..vocab.len())
        .map(|_| {
            (0..d)
                .map(|_| (rng.random::<f64>() - 0.5) / d as f64)
                .collect()
        })
        .collect();
    let mut output: Vec<Vec<f64>> = vec![vec![0.0; d]; vocab.len()];

    let encoded: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t).copied()).collect())
        .collect();
    let total_centers: usize = encoded.iter().map(Vec::len).sum::<usize>() * params.epochs;
    let lr0 = params.learning_rate;
    let mut processed = 0usize;

    let mut epoch_loss = Vec::with_capacity(params.epochs);
    for _ in 0..params.epochs {
        let mut loss_sum = 0.0;
        let mut pair_count = 0usize;
        for sentence in &encoded {
            for (t, &center) in sentence.iter().enumerate() {
                let lr = (lr0 * (1.0 - processed as f64 / total_centers as f64)).max(lr0 * 1e-4);
                processed += 1;
                let shrink = rng.random_range(0..params.window);
                let reach = params.window - shrink;
                let lo = t.saturating_sub(reach);
                let hi = (t + reach).min(sentence.len() - 1);
                for (j, &context) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == t {
                        continue;
                    }
                    let mut neg_idx = Vec::with_capacity(params.negatives);
                    for _ in 0..params.negatives {
                        let r = rng.random_range(0.0..total);
                        let n = cum.partition_point(|&c| c <= r).min(vocab.len() - 1);
                        if n != context {
                            neg_idx.push(n);
                        }
                    }
                    let negs: Vec<&[f64]> = neg_idx.iter().map(|&n| output[n].as_slice()).collect();
                    let grads = pair_gradients(&input[center], &output[context], &negs);
                    loss_sum += grads.loss;
                    pair_count += 1;
                    for (x, g) in input[center].iter_mut().zip(&grads.center) {
                        *x -= lr * g;
                    }
                    for (x, g) in output[context].iter_mut().zip(&grads.positive) {
                        *x -= lr * g;
                    }
                    for (&n, grad) in neg_idx.iter().zip(&grads.negatives) {
                        for (x, g) in output[n].iter_mut().zip(grad) {
                            *x -= lr * g;
                        }
                    }
                }
            }
        }
        epoch_loss.push(if pair_count == 0 {
            0.0
        } else {
            loss_sum / pair_count as f64
        });
    }

    Ok(EmbeddingModel {
        vocab,
        index,
        counts,
        input,
        output,
        params: params.clone(),
        seed,
        epoch_loss,
    })
}

/// Top-k neighbors of `token` by cosine over input vectors, excluding
/// the token itself; descending similarity, ties broken by token order.
pub fn most_similar(
    model: &EmbeddingModel,
    token: &str,
    k: usize,
) -> Result<Vec<(String, f64)>, EmbedError> {
    let qi = *model
        .index
        .get(token)
        .ok_or_else(|| EmbedError::OutOfVocabulary {
            token: token.to_string(),
        })?;
    let q = &model.input[qi];
    let mut scored: Vec<(usize, f64)> = (0..model.vocab.len())
        .filter(|&i| i != qi)
        .map(|i| (i, cosine(q, &model.input[i])))
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| model.vocab[a.0].cmp(&model.vocab[b.0]))
    });
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(i, c)| (model.vocab[i].clone(), c))
        .collect())
}

/// Which region's neighborhood a network edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Annotation {
    NorthOnly,
    SouthOnly,
    Common,
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Annotation::NorthOnly => "north_only",
            Annotation::SouthOnly => "south_only",
            Annotation::Common => "common",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NetworkEdge {
    pub neighbor: String,
    pub annotation: Annotation,
    /// Cosine in the region the edge comes from; for common edges the
    /// larger of the two regional values.
    pub cosine: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WordNetwork {
    pub seed: String,
    pub edges: Vec<NetworkEdge>,
}

#[derive(Debug, Clone)]
pub struct WordNetworkSet {
    pub networks: Vec<WordNetwork>,
    /// Seeds absent from at least one vocabulary, reported rather than fatal.
    pub missing_seeds: Vec<String>,
}

pub const DEFAULT_NETWORK_K: usize = 100;

/// The six surveillance keywords used as default network seeds.
pub fn default_seed_tokens() -> Vec<String> {
    ["influenza", "cold", "cough", "fever", "sneeze", "rhinobyon"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Partitions each seed's two regional top-k neighbor lists into
/// region-exclusive and common edges. The stop list is applied after
/// the top-k cut, so it removes edges without promoting replacements.
pub fn build_word_network(
    seeds: &[String],
    north: &EmbeddingModel,
    south: &EmbeddingModel,
    k: usize,
    stoplist: &BTreeSet<String>,
) -> WordNetworkSet {
    let mut networks = Vec::new();
    let mut missing_seeds = Vec::new();
    for seed in seeds {
        if !north.contains(seed) || !south.contains(seed) {
            log::warn!("seed {seed:?} missing from a regional vocabulary; skipped");
            missing_seeds.push(seed.clone());
            continue;
        }
        let keep = |pairs: Vec<(String, f64)>| -> BTreeMap<String, f64> {
            pairs
                .into_iter()
                .filter(|(t, _)| !stoplist.contains(t))
                .collect()
        };
        let top_n = keep(most_similar(north, seed, k).expect("seed checked"));
        let top_s = keep(most_similar(south, seed, k).expect("seed checked"));

        let mut edges = Vec::new();
        for (token, &cos_n) in &top_n {
            match top_s.get(token) {
                Some(&cos_s) => edges.push(NetworkEdge {
                    neighbor: token.clone(),
                    annotation: Annotation::Common,
                    cosine: cos_n.max(cos_s),
                }),
                None => edges.push(NetworkEdge {
                    neighbor: token.clone(),
                    annotation: Annotation::NorthOnly,
                    cosine: cos_n,
                }),
            }
        }
        for (token, &cos_s) in &top_s {
            if !top_n.contains_key(token) {
                edges.push(NetworkEdge {
                    neighbor: token.clone(),
                    annotation: Annotation::SouthOnly,
                    cosine: cos_s,
                });
            }
        }
        edges.sort_by(|a, b| {
            b.cosine
                .partial_cmp(&a.cosine)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.neighbor.cmp(&b.neighbor))
        });
        networks.push(WordNetwork {
            seed: seed.clone(),
            edges,
        });
    }
    WordNetworkSet {
        networks,
        missing_seeds,
    }
}

/// One token per line; blank lines and `#` comments ignored.
pub fn load_stoplist(path: &Path) -> Result<BTreeSet<String>, EmbedError> {
    let body = fs::read_to_string(path).map_err(|source| EmbedError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(body
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// Text export: header `|V| d`, then one `token v1 .. vd` row per word.
pub fn export_embeddings(model: &EmbeddingModel, path: &Path) -> Result<(), EmbedError> {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", model.vocab.len(), model.dim()));
    for (token, row) in model.vocab.iter().zip(&model.input) {
        out.push_str(token);
        for v in row {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| EmbedError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Edge-list CSV `seed,neighbor,annotation,cosine`.
pub fn write_network_csv(networks: &[WordNetwork], path: &Path) -> Result<(), EmbedError> {
    let to_csv_err = |message: String| EmbedError::Csv {
        path: path.display().to_string(),
        message,
    };
    let mut writer = csv::Writer::from_path(path).map_err(|e| to_csv_err(e.to_string()))?;
    writer
        .write_record(["seed", "neighbor", "annotation", "cosine"])
        .map_err(|e| to_csv_err(e.to_string()))?;
    for network in networks {
        for edge in &network.edges {
            writer
                .write_record([
                    network.seed.as_str(),
                    edge.neighbor.as_str(),
                    &edge.annotation.to_string(),
                    &edge.cosine.to_string(),
                ])
                .map_err(|e| to_csv_err(e.to_string()))?;
        }
    }
    writer.flush().map_err(|e| to_csv_err(e.to_string()))?;
    Ok(())
}
