//! Information-gain feature selection and TF-IDF vectorization.
//!
//! Terms are scored by the mutual information (in bits) between their
//! binary document presence and the class label, the top k survive, and
//! documents become L2-normalized sparse TF-IDF vectors over the selected
//! vocabulary. [`sweep_dimensions`] retrains a classifier per candidate k
//! and keeps the dimension with the best held-out accuracy.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classifier::{self, Kernel};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("got {labels} labels for {docs} documents")]
    LabelMismatch { docs: usize, labels: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("train/test split left a side without both classes")]
    DegenerateSplit,
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Svm(#[from] classifier::SvmError),
}

/// Mutual information (bits) between a binary presence feature and a
/// binary label: `H(label) - H(label | presence)`.
pub fn ig_score(presence: &[bool], labels: &[bool]) -> Result<f64, FeatureError> {
    if labels.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    if presence.len() != labels.len() {
        return Err(FeatureError::LabelMismatch {
            docs: presence.len(),
            labels: labels.len(),
        });
    }
    let n = labels.len() as f64;
    let mut counts = [[0.0f64; 2]; 2];
    for (&p, &l) in presence.iter().zip(labels) {
        counts[p as usize][l as usize] += 1.0;
    }
    let h = |pos: f64, total: f64| -> f64 {
        if total == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for q in [pos / total, 1.0 - pos / total] {
            if q > 0.0 {
                acc -= q * q.log2();
            }
        }
        acc
    };
    let total_pos = counts[0][1] + counts[1][1];
    let h_label = h(total_pos, n);
    let mut h_cond = 0.0;
    for row in counts {
        let t = row[0] + row[1];
        h_cond += t / n * h(row[1], t);
    }
    Ok((h_label - h_cond).max(0.0))
}

/// Fitted vocabulary with document frequencies, IG scores, and the
/// selected top-k subset (descending IG, ties broken by token order).
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    vocabulary: Vec<String>,
    doc_freq: Vec<u32>,
    n_docs: usize,
    ig: Vec<f64>,
    selected: Vec<String>,
    selected_index: HashMap<String, usize>,
    idf: Vec<f64>,
}

impl FeatureSpace {
    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn selected(&self) -> &[String] {
        &self.selected
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn dim(&self) -> usize {
        self.selected.len()
    }

    pub fn ig_of(&self, token: &str) -> Option<f64> {
        self.vocabulary
            .binary_search_by(|t| t.as_str().cmp(token))
            .ok()
            .map(|i| self.ig[i])
    }

    pub fn doc_freq_of(&self, token: &str) -> Option<u32> {
        self.vocabulary
            .binary_search_by(|t| t.as_str().cmp(token))
            .ok()
            .map(|i| self.doc_freq[i])
    }

    /// Writes the versioned flat-file form.
    pub fn save(&self, path: &Path) -> Result<(), FeatureError> {
        let mut out = String::new();
        out.push_str("flusig-feature-space v1\n");
        out.push_str(&format!("n_docs {}\n", self.n_docs));
        out.push_str(&format!("vocab {}\n", self.vocabulary.len()));
        for i in 0..self.vocabulary.len() {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                self.vocabulary[i], self.doc_freq[i], self.ig[i]
            ));
        }
        out.push_str(&format!("selected {}\n", self.selected.len()));
        for t in &self.selected {
            out.push_str(t);
            out.push('\n');
        }
        fs::write(path, out).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, FeatureError> {
        let body = fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let err = |line: usize, message: String| FeatureError::Parse {
            path: path.display().to_string(),
            line,
            message,
        };
        let mut lines = body.lines().enumerate();
        let mut expect = |tag: &str| -> Result<(usize, String), FeatureError> {
            let (i, line) = lines
                .next()
                .ok_or_else(|| err(0, format!("missing {tag} line")))?;
            Ok((i + 1, line.to_string()))
        };
        let (l, header) = expect("header")?;
        if header != "flusig-feature-space v1" {
            return Err(err(l, format!("unsupported header {header:?}")));
        }
        let parse_count = |l: usize, line: &str, tag: &str| -> Result<usize, FeatureError> {
            line.strip_prefix(tag)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| err(l, format!("expected `{tag} <count>`")))
        };
        let (l, line) = expect("n_docs")?;
        let n_docs = parse_count(l, &line, "n_docs")?;
        let (l, line) = expect("vocab")?;
        let n_vocab = parse_count(l, &line, "vocab")?;
        let mut vocabulary = Vec::with_capacity(n_vocab);
        let mut doc_freq = Vec::with_capacity(n_vocab);
        let mut ig = Vec::with_capacity(n_vocab);
        for _ in 0..n_vocab {
            let (l, line) = expect("vocab row")?;
            let mut parts = line.split('\t');
            let token = parts.next().unwrap_or_default();
            let df = parts.next().and_then(|s| s.parse().ok());
            let score = parts.next().and_then(|s| s.parse().ok());
            match (df, score) {
                (Some(df), Some(score)) if !token.is_empty() => {
                    vocabulary.push(token.to_string());
                    doc_freq.push(df);
                    ig.push(score);
                }
                _ => return Err(err(l, format!("bad vocab row {line:?}"))),
            }
        }
        let (l, line) = expect("selected")?;
        let n_sel = parse_count(l, &line, "selected")?;
        let mut selected = Vec::with_capacity(n_sel);
        for _ in 0..n_sel {
            let (_, line) = expect("selected row")?;
            selected.push(line);
        }
        Ok(FeatureSpace::assemble(
            vocabulary, doc_freq, n_docs, ig, selected,
        ))
    }

    fn assemble(
        vocabulary: Vec<String>,
        doc_freq: Vec<u32>,
        n_docs: usize,
        ig: Vec<f64>,
        selected: Vec<String>,
    ) -> FeatureSpace {
        let df_by_token: HashMap<&str, u32> = vocabulary
            .iter()
            .map(String::as_str)
            .zip(doc_freq.iter().copied())
            .collect();
        let idf = selected
            .iter()
            .map(|t| {
                let df = df_by_token.get(t.as_str()).copied().unwrap_or(0);
                ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
            })
            .collect();
        let selected_index = selected
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        FeatureSpace {
            vocabulary,
            doc_freq,
            n_docs,
            ig,
            selected,
            selected_index,
            idf,
        }
    }
}

/// Scores every token of the corpus and keeps the top k. A k beyond the
/// vocabulary size selects everything (with a warning).
pub fn fit_feature_space(
    docs: &[Vec<String>],
    labels: &[bool],
    k: usize,
) -> Result<FeatureSpace, FeatureError> {
    if docs.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    if labels.len() != docs.len() {
        return Err(FeatureError::LabelMismatch {
            docs: docs.len(),
            labels: labels.len(),
        });
    }
    if k == 0 {
        return Err(FeatureError::ZeroK);
    }

    // presence sets per document, then document frequency per token
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    let mut presence_rows: Vec<Vec<&str>> = Vec::with_capacity(docs.len());
    for doc in docs {
        let mut seen: Vec<&str> = doc.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in &seen {
            *df.entry(t).or_insert(0) += 1;
        }
        presence_rows.push(seen);
    }

    let vocabulary: Vec<String> = df.keys().map(|t| t.to_string()).collect();
    let doc_freq: Vec<u32> = df.values().copied().collect();
    let index: HashMap<&str, usize> = df.keys().enumerate().map(|(i, &t)| (t, i)).collect();

    let mut presence = vec![vec![false; docs.len()]; vocabulary.len()];
    for (d, row) in presence_rows.iter().enumerate() {
        for t in row {
            presence[index[t]][d] = true;
        }
    }
    let ig: Vec<f64> = presence
        .iter()
        .map(|p| ig_score(p, labels).expect("validated above"))
        .collect();

    let mut order: Vec<usize> = (0..vocabulary.len()).collect();
    order.sort_by(|&a, &b| {
        ig[b]
            .partial_cmp(&ig[a])
            .expect("ig scores are finite")
            .then_with(|| vocabulary[a].cmp(&vocabulary[b]))
    });
    let take = if k > vocabulary.len() {
        log::warn!(
            "requested k={k} exceeds vocabulary size {}; selecting all tokens",
            vocabulary.len()
        );
        vocabulary.len()
    } else {
        k
    };
    let selected: Vec<String> = order[..take]
        .iter()
        .map(|&i| vocabulary[i].clone())
        .collect();

    Ok(FeatureSpace::assemble(
        vocabulary,
        doc_freq,
        docs.len(),
        ig,
        selected,
    ))
}

/// Sparse vector over the selected vocabulary; unit L2 norm unless the
/// document had no selected token (then exactly zero).
#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl DocVector {
    pub fn new(dim: usize, mut entries: Vec<(u32, f64)>) -> DocVector {
        entries.sort_by_key(|&(i, _)| i);
        entries.retain(|&(_, v)| v != 0.0);
        DocVector { dim, entries }
    }

    /// Dense constructor for tests and small examples.
    pub fn dense(values: &[f64]) -> DocVector {
        DocVector::new(
            values.len(),
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as u32, v))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dot(&self, other: &DocVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.entries.len() && j < other.entries.len() {
            let (a, av) = self.entries[i];
            let (b, bv) = other.entries[j];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += av * bv;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn sq_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.sq_norm().sqrt()
    }

    pub fn sq_dist(&self, other: &DocVector) -> f64 {
        (self.sq_norm() + other.sq_norm() - 2.0 * self.dot(other)).max(0.0)
    }
}

/// TF-IDF with raw term counts and the smoothed idf
/// `ln((1+n)/(1+df)) + 1`, L2-normalized.
pub fn tfidf_transform(doc: &[String], space: &FeatureSpace) -> DocVector {
    let mut tf: BTreeMap<usize, u32> = BTreeMap::new();
    for token in doc {
        if let Some(&i) = space.selected_index.get(token) {
            *tf.entry(i).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<(u32, f64)> = tf
        .into_iter()
        .map(|(i, count)| (i as u32, count as f64 * space.idf[i]))
        .collect();
    let norm = entries.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for e in &mut entries {
            e.1 /= norm;
        }
    }
    DocVector {
        dim: space.dim(),
        entries,
    }
}

pub fn transform_many(docs: &[Vec<String>], space: &FeatureSpace) -> Vec<DocVector> {
    docs.iter().map(|d| tfidf_transform(d, space)).collect()
}

/// Evaluation setup for the dimension sweep.
#[derive(Debug, Clone)]
pub struct SweepEval {
    pub test_fraction: f64,
    pub seed: u64,
    pub kernel: Kernel,
    pub c: f64,
    pub tol: f64,
}

impl Default for SweepEval {
    fn default() -> Self {
        SweepEval {
            test_fraction: 0.2,
            seed: 0,
            kernel: Kernel::Rbf { gamma: 0.0 },
            c: 1.0,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub selected_dim: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepResult {
    pub best_k: usize,
    pub rows: Vec<SweepRow>,
}

/// Deterministic stratified train/test split: per-class index shuffle
/// under the seed, first `test_fraction` of each class held out.
pub fn stratified_split(
    labels: &[bool],
    test_fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng);
        let n_test = ((idx.len() as f64) * test_fraction).round() as usize;
        test.extend_from_slice(&idx[..n_test.min(idx.len())]);
        train.extend_from_slice(&idx[n_test.min(idx.len())..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn gather<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

fn accuracy(model: &classifier::SvmModel, vectors: &[DocVector], labels: &[bool]) -> f64 {
    let correct = vectors
        .iter()
        .zip(labels)
        .filter(|(v, &l)| classifier::predict(model, v).expect("dims match") == l)
        .count();
    correct as f64 / labels.len().max(1) as f64
}

/// Fits a feature space and SVM per grid value and keeps the k with the
/// best held-out accuracy (smallest k wins ties). An RBF gamma of zero in
/// `eval` means "1 / selected dimension" per trained model.
pub fn sweep_dimensions(
    docs: &[Vec<String>],
    labels: &[bool],
    grid: &[usize],
    eval: &SweepEval,
) -> Result<SweepResult, FeatureError> {
    if grid.is_empty() {
        return Err(FeatureError::EmptyGrid);
    }
    if docs.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    if labels.len() != docs.len() {
        return Err(FeatureError::LabelMismatch {
            docs: docs.len(),
            labels: labels.len(),
        });
    }
    let (train_idx, test_idx) = stratified_split(labels, eval.test_fraction, eval.seed);
    let both = |idx: &[usize]| idx.iter().any(|&i| labels[i]) && idx.iter().any(|&i| !labels[i]);
    if train_idx.is_empty() || test_idx.is_empty() || !both(&train_idx) || !both(&test_idx) {
        return Err(FeatureError::DegenerateSplit);
    }
    let train_docs = gather(docs, &train_idx);
    let train_labels = gather(labels, &train_idx);
    let test_docs = gather(docs, &test_idx);
    let test_labels = gather(labels, &test_idx);

    let mut rows = Vec::with_capacity(grid.len());
    for &k in grid {
        let space = fit_feature_space(&train_docs, &train_labels, k)?;
        let train_vecs = transform_many(&train_docs, &space);
        let test_vecs = transform_many(&test_docs, &space);
        let kernel = match eval.kernel {
            Kernel::Rbf { gamma } if gamma <= 0.0 => Kernel::Rbf {
                gamma: 1.0 / space.dim().max(1) as f64,
            },
            other => other,
        };
        let model = classifier::train_svm(&train_vecs, &train_labels, kernel, eval.c, eval.tol)?;
        rows.push(SweepRow {
            k,
            selected_dim: space.dim(),
            train_accuracy: accuracy(&model, &train_vecs, &train_labels),
            test_accuracy: accuracy(&model, &test_vecs, &test_labels),
        });
    }

    let best_k = rows
        .iter()
        .map(|r| (r.k, r.test_accuracy))
        .fold(None::<(usize, f64)>, |best, (k, acc)| match best {
            None => Some((k, acc)),
            Some((bk, bacc)) => {
                if acc > bacc || (acc == bacc && k < bk) {
                    Some((k, acc))
                } else {
                    Some((bk, bacc))
                }
            }
        })
        .expect("grid non-empty")
        .0;
    Ok(SweepResult { best_k, rows })
}
