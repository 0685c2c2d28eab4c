//! Kernel SVM trained by sequential minimal optimization.
//!
//! The solver works on the dual problem (minimize `a'Qa/2 - e'a` under
//! `0 <= a <= C`, `y'a = 0`) by repeatedly picking the maximal
//! KKT-violating pair, with index order breaking ties so training is
//! fully deterministic. Kernel rows are cached on first touch.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Label, Post};
use crate::features::{tfidf_transform, DocVector, FeatureSpace};

const MAX_ITER: usize = 100_000;
const TAU: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("got {labels} labels for {vectors} vectors")]
    LabelMismatch { vectors: usize, labels: usize },
    #[error("training set contains a single class")]
    SingleClass,
    #[error("vector dimension {got} does not match expected {expected}")]
    DimMismatch { expected: usize, got: usize },
    #[error("parameter {name} must be positive, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("no convergence after {iterations} iterations (KKT violation {violation:.3e})")]
    NoConvergence { iterations: usize, violation: f64 },
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
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &DocVector, b: &DocVector) -> f64 {
        match *self {
            Kernel::Linear => a.dot(b),
            Kernel::Rbf { gamma } => (-gamma * a.sq_dist(b)).exp(),
        }
    }
}

/// Trained model: support vectors with signed dual coefficients
/// (`alpha_i * y_i`), satisfying `sum(dual_coef) = 0` and
/// `|dual_coef_i| <= C`.
#[derive(Debug, Clone)]
pub struct SvmModel {
    pub support_vectors: Vec<DocVector>,
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
    pub c: f64,
    pub dim: usize,
}

struct Solver<'a> {
    vectors: &'a [DocVector],
    y: Vec<f64>,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    kernel: Kernel,
    c: f64,
    cache: Vec<Option<Vec<f64>>>,
}

struct Solution {
    alpha: Vec<f64>,
    rho: f64,
    iterations: usize,
    objective_trace: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(vectors: &'a [DocVector], y: Vec<f64>, kernel: Kernel, c: f64) -> Solver<'a> {
        let n = vectors.len();
        Solver {
            vectors,
            y,
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            kernel,
            c,
            cache: vec![None; n],
        }
    }

    fn ensure_row(&mut self, i: usize) {
        if self.cache[i].is_none() {
            let vi = &self.vectors[i];
            let row = self
                .vectors
                .iter()
                .map(|v| self.kernel.eval(vi, v))
                .collect();
            self.cache[i] = Some(row);
        }
    }

    fn k(&self, i: usize, j: usize) -> f64 {
        self.cache[i].as_ref().expect("row cached")[j]
    }

    /// Maximal violating pair: i maximizes -yG over the up set, j
    /// minimizes it over the down set; smaller indices win ties.
    fn select_pair(&self) -> (usize, usize, f64) {
        let n = self.alpha.len();
        let mut i = usize::MAX;
        let mut m = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut mm = f64::INFINITY;
        for t in 0..n {
            let v = -self.y[t] * self.grad[t];
            let up = (self.y[t] > 0.0 && self.alpha[t] < self.c)
                || (self.y[t] < 0.0 && self.alpha[t] > 0.0);
            let down = (self.y[t] > 0.0 && self.alpha[t] > 0.0)
                || (self.y[t] < 0.0 && self.alpha[t] < self.c);
            if up && v > m {
                m = v;
                i = t;
            }
            if down && v < mm {
                mm = v;
                j = t;
            }
        }
        (i, j, m - mm)
    }

    fn step(&mut self, i: usize, j: usize) {
        self.ensure_row(i);
        self.ensure_row(j);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (k_ii, k_jj, k_ij) = (self.k(i, i), self.k(j, j), self.k(i, j));
        let c = self.c;

        // curvature along the feasible direction: |phi(x_i) - phi(x_j)|^2
        let quad = (k_ii + k_jj - 2.0 * k_ij).max(TAU);
        if self.y[i] != self.y[j] {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = old_i - old_j;
            self.alpha[i] += delta;
            self.alpha[j] += delta;
            if diff > 0.0 {
                if self.alpha[j] < 0.0 {
                    self.alpha[j] = 0.0;
                    self.alpha[i] = diff;
                }
            } else if self.alpha[i] < 0.0 {
                self.alpha[i] = 0.0;
                self.alpha[j] = -diff;
            }
            if diff > 0.0 {
                if self.alpha[i] > c {
                    self.alpha[i] = c;
                    self.alpha[j] = c - diff;
                }
            } else if self.alpha[j] > c {
                self.alpha[j] = c;
                self.alpha[i] = c + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = old_i + old_j;
            self.alpha[i] -= delta;
            self.alpha[j] += delta;
            if sum > c {
                if self.alpha[i] > c {
                    self.alpha[i] = c;
                    self.alpha[j] = sum - c;
                }
            } else if self.alpha[j] < 0.0 {
                self.alpha[j] = 0.0;
                self.alpha[i] = sum;
            }
            if sum > c {
                if self.alpha[j] > c {
                    self.alpha[j] = c;
                    self.alpha[i] = sum - c;
                }
            } else if self.alpha[i] < 0.0 {
                self.alpha[i] = 0.0;
                self.alpha[j] = sum;
            }
        }

        let (delta_i, delta_j) = (self.alpha[i] - old_i, self.alpha[j] - old_j);
        let row_i = self.cache[i].take().expect("row cached");
        let row_j = if j == i {
            unreachable!("pair indices are distinct")
        } else {
            self.cache[j].take().expect("row cached")
        };
        for t in 0..self.grad.len() {
            self.grad[t] +=
                self.y[t] * (self.y[i] * row_i[t] * delta_i + self.y[j] * row_j[t] * delta_j);
        }
        self.cache[i] = Some(row_i);
        self.cache[j] = Some(row_j);
    }

    fn objective(&self) -> f64 {
        0.5 * self
            .alpha
            .iter()
            .zip(&self.grad)
            .map(|(a, g)| a * (g - 1.0))
            .sum::<f64>()
    }

    fn rho(&self) -> f64 {
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        let mut sum_free = 0.0;
        let mut n_free = 0usize;
        for t in 0..self.alpha.len() {
            let yg = self.y[t] * self.grad[t];
            if self.alpha[t] >= self.c {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.alpha[t] <= 0.0 {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                sum_free += yg;
            }
        }
        if n_free > 0 {
            sum_free / n_free as f64
        } else {
            (ub + lb) / 2.0
        }
    }

    fn solve(mut self, tol: f64, trace: bool) -> Result<Solution, SvmError> {
        let mut objective_trace = Vec::new();
        for it in 0..MAX_ITER {
            let (i, j, violation) = self.select_pair();
            if violation < tol {
                let rho = self.rho();
                return Ok(Solution {
                    alpha: self.alpha,
                    rho,
                    iterations: it,
                    objective_trace,
                });
            }
            self.step(i, j);
            if trace {
                objective_trace.push(self.objective());
            }
        }
        let (_, _, violation) = self.select_pair();
        Err(SvmError::NoConvergence {
            iterations: MAX_ITER,
            violation,
        })
    }
}

fn train_inner(
    vectors: &[DocVector],
    labels: &[bool],
    kernel: Kernel,
    c: f64,
    tol: f64,
    trace: bool,
) -> Result<(SvmModel, Solution), SvmError> {
    if vectors.is_empty() {
        return Err(SvmError::EmptyTrainingSet);
    }
    if labels.len() != vectors.len() {
        return Err(SvmError::LabelMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    if c <= 0.0 {
        return Err(SvmError::InvalidParameter {
            name: "C",
            value: c,
        });
    }
    if tol <= 0.0 {
        return Err(SvmError::InvalidParameter {
            name: "tol",
            value: tol,
        });
    }
    if let Kernel::Rbf { gamma } = kernel {
        if gamma <= 0.0 {
            return Err(SvmError::InvalidParameter {
                name: "gamma",
                value: gamma,
            });
        }
    }
    let dim = vectors[0].dim();
    for v in vectors {
        if v.dim() != dim {
            return Err(SvmError::DimMismatch {
                expected: dim,
                got: v.dim(),
            });
        }
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(SvmError::SingleClass);
    }

    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let solution = Solver::new(vectors, y.clone(), kernel, c).solve(tol, trace)?;
    log::debug!(
        "solver converged after {} iterations ({} objective samples)",
        solution.iterations,
        solution.objective_trace.len()
    );

    let mut support_vectors = Vec::new();
    let mut dual_coef = Vec::new();
    for t in 0..vectors.len() {
        if solution.alpha[t] > 0.0 {
            support_vectors.push(vectors[t].clone());
            dual_coef.push(solution.alpha[t] * y[t]);
        }
    }
    let model = SvmModel {
        support_vectors,
        dual_coef,
        bias: -solution.rho,
        kernel,
        c,
        dim,
    };
    Ok((model, solution))
}

/// Trains until every KKT violation is below `tol` (at most 10^5 pair
/// updates). `labels` are booleans; `true` is the positive class.
pub fn train_svm(
    vectors: &[DocVector],
    labels: &[bool],
    kernel: Kernel,
    c: f64,
    tol: f64,
) -> Result<SvmModel, SvmError> {
    train_inner(vectors, labels, kernel, c, tol, false).map(|(m, _)| m)
}

#[cfg(test)]
fn train_traced(
    vectors: &[DocVector],
    labels: &[bool],
    kernel: Kernel,
    c: f64,
    tol: f64,
) -> Result<(SvmModel, Vec<f64>), SvmError> {
    train_inner(vectors, labels, kernel, c, tol, true).map(|(m, s)| (m, s.objective_trace))
}

/// `sum_i dual_coef_i * K(sv_i, x) + bias`.
pub fn decision_value(model: &SvmModel, x: &DocVector) -> Result<f64, SvmError> {
    if x.dim() != model.dim {
        return Err(SvmError::DimMismatch {
            expected: model.dim,
            got: x.dim(),
        });
    }
    let mut acc = model.bias;
    for (sv, coef) in model.support_vectors.iter().zip(&model.dual_coef) {
        acc += coef * model.kernel.eval(sv, x);
    }
    Ok(acc)
}

/// Sign of the decision value; exactly zero maps to the positive class.
pub fn predict(model: &SvmModel, x: &DocVector) -> Result<bool, SvmError> {
    Ok(decision_value(model, x)? >= 0.0)
}

/// Confusion-matrix metrics; ratios with zero denominators are reported
/// as absent rather than zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

pub fn evaluate(
    model: &SvmModel,
    vectors: &[DocVector],
    labels: &[bool],
) -> Result<EvalReport, SvmError> {
    if vectors.is_empty() {
        return Err(SvmError::EmptyTestSet);
    }
    if labels.len() != vectors.len() {
        return Err(SvmError::LabelMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    let (mut tp, mut fp, mut tn, mut fnn) = (0usize, 0usize, 0usize, 0usize);
    for (v, &actual) in vectors.iter().zip(labels) {
        let predicted = predict(model, v)?;
        match (predicted, actual) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fnn += 1,
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    Ok(EvalReport {
        accuracy: (tp + tn) as f64 / labels.len() as f64,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fnn),
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fnn,
    })
}

/// Labels every post by the model's prediction on its TF-IDF vector.
pub fn label_corpus(
    model: &SvmModel,
    posts: &[Post],
    space: &FeatureSpace,
) -> Result<Vec<Post>, SvmError> {
    posts
        .iter()
        .map(|post| {
            let v = tfidf_transform(&post.tokens, space);
            let mut labeled = post.clone();
            labeled.label = if predict(model, &v)? {
                Label::Influenza
            } else {
                Label::Noise
            };
            Ok(labeled)
        })
        .collect()
}

impl SvmModel {
    /// Writes the versioned flat-file form.
    pub fn save(&self, path: &Path) -> Result<(), SvmError> {
        let mut out = String::new();
        out.push_str("flusig-svm v1\n");
        match self.kernel {
            Kernel::Linear => out.push_str("kernel linear\n"),
            Kernel::Rbf { gamma } => out.push_str(&format!("kernel rbf {gamma}\n")),
        }
        out.push_str(&format!("c {}\n", self.c));
        out.push_str(&format!("bias {}\n", self.bias));
        out.push_str(&format!("dim {}\n", self.dim));
        out.push_str(&format!("nsv {}\n", self.support_vectors.len()));
        for (sv, coef) in self.support_vectors.iter().zip(&self.dual_coef) {
            out.push_str(&format!("{coef}\t"));
            let pairs: Vec<String> = sv
                .entries()
                .iter()
                .map(|(i, v)| format!("{i}:{v}"))
                .collect();
            out.push_str(&pairs.join(" "));
            out.push('\n');
        }
        fs::write(path, out).map_err(|source| SvmError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<SvmModel, SvmError> {
        let body = fs::read_to_string(path).map_err(|source| SvmError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let err = |line: usize, message: String| SvmError::Parse {
            path: path.display().to_string(),
            line,
            message,
        };
        let mut lines = body.lines().enumerate();
        let mut next = |tag: &str| -> Result<(usize, String), SvmError> {
            lines
                .next()
                .map(|(i, l)| (i + 1, l.to_string()))
                .ok_or_else(|| err(0, format!("missing {tag} line")))
        };
        let (l, header) = next("header")?;
        if header != "flusig-svm v1" {
            return Err(err(l, format!("unsupported header {header:?}")));
        }
        let (l, line) = next("kernel")?;
        let kernel = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["kernel", "linear"] => Kernel::Linear,
            ["kernel", "rbf", g] => Kernel::Rbf {
                gamma: g.parse().map_err(|_| err(l, format!("bad gamma {g:?}")))?,
            },
            _ => return Err(err(l, format!("bad kernel line {line:?}"))),
        };
        let scalar = |l: usize, line: &str, tag: &str| -> Result<f64, SvmError> {
            line.strip_prefix(tag)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| err(l, format!("expected `{tag} <value>`")))
        };
        let (l, line) = next("c")?;
        let c = scalar(l, &line, "c")?;
        let (l, line) = next("bias")?;
        let bias = scalar(l, &line, "bias")?;
        let (l, line) = next("dim")?;
        let dim = scalar(l, &line, "dim")? as usize;
        let (l, line) = next("nsv")?;
        let nsv = scalar(l, &line, "nsv")? as usize;

        let mut support_vectors = Vec::with_capacity(nsv);
        let mut dual_coef = Vec::with_capacity(nsv);
        for _ in 0..nsv {
            let (l, line) = next("support vector")?;
            let (coef, rest) = line
                .split_once('\t')
                .ok_or_else(|| err(l, "expected coef<TAB>entries".to_string()))?;
            let coef: f64 = coef
                .parse()
                .map_err(|_| err(l, format!("bad coefficient {coef:?}")))?;
            let mut entries = Vec::new();
            for pair in rest.split_whitespace() {
                let (i, v) = pair
                    .split_once(':')
                    .ok_or_else(|| err(l, format!("bad entry {pair:?}")))?;
                let i: u32 = i.parse().map_err(|_| err(l, format!("bad index {i:?}")))?;
                let v: f64 = v.parse().map_err(|_| err(l, format!("bad value {v:?}")))?;
                entries.push((i, v));
            }
            support_vectors.push(DocVector::new(dim, entries));
            dual_coef.push(coef);
        }
        Ok(SvmModel {
            support_vectors,
            dual_coef,
            bias,
            kernel,
            c,
            dim,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dense(rows: &[&[f64]]) -> Vec<DocVector> {
        rows.iter().map(|r| DocVector::dense(r)).collect()
    }

    #[test]
    fn two_point_analytic_separator() {
        let vectors = dense(&[&[-1.0], &[1.0]]);
        let labels = [false, true];
        let model = train_svm(&vectors, &labels, Kernel::Linear, 100.0, 1e-6).unwrap();
        // max-margin separator of {-1,+1}: w=1, b=0, alpha=1/2 each
        assert_eq!(model.support_vectors.len(), 2);
        for coef in &model.dual_coef {
            assert_abs_diff_eq!(coef.abs(), 0.5, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(model.bias, 0.0, epsilon = 1e-6);
        let f = decision_value(&model, &DocVector::dense(&[0.5])).unwrap();
        assert_abs_diff_eq!(f, 0.5, epsilon = 1e-4);
        assert!(predict(&model, &DocVector::dense(&[0.5])).unwrap());
        assert!(!predict(&model, &DocVector::dense(&[-0.5])).unwrap());
    }

    #[test]
    fn zero_decision_maps_to_positive() {
        let model = SvmModel {
            support_vectors: vec![],
            dual_coef: vec![],
            bias: 0.0,
            kernel: Kernel::Linear,
            c: 1.0,
            dim: 1,
        };
        assert!(predict(&model, &DocVector::dense(&[3.0])).unwrap());
    }

    #[test]
    fn xor_with_rbf() {
        let vectors = dense(&[&[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]]);
        let labels = [false, false, true, true];
        let model = train_svm(&vectors, &labels, Kernel::Rbf { gamma: 1.0 }, 1000.0, 1e-6).unwrap();
        for (v, &l) in vectors.iter().zip(&labels) {
            assert_eq!(predict(&model, v).unwrap(), l);
        }
    }

    #[test]
    fn dual_feasibility_and_margin_condition() {
        let vectors = dense(&[
            &[0.0, 0.1],
            &[0.2, 0.0],
            &[0.1, 0.15],
            &[1.0, 0.9],
            &[0.8, 1.1],
            &[1.1, 1.0],
        ]);
        let labels = [false, false, false, true, true, true];
        let tol = 1e-6;
        let model = train_svm(&vectors, &labels, Kernel::Rbf { gamma: 0.5 }, 10.0, tol).unwrap();
        let sum: f64 = model.dual_coef.iter().sum();
        assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-9);
        assert!(!model.dual_coef.is_empty());
        for (sv, &coef) in model.support_vectors.iter().zip(&model.dual_coef) {
            assert!(coef.abs() <= model.c + 1e-12);
            if coef.abs() < model.c - 1e-9 {
                // free support vector sits on its margin
                let y = coef.signum();
                let f = decision_value(&model, sv).unwrap();
                assert_abs_diff_eq!(f, y, epsilon = 10.0 * tol);
            }
        }
    }

    #[test]
    fn rbf_self_kernel_is_one() {
        let k = Kernel::Rbf { gamma: 0.7 };
        let x = DocVector::dense(&[0.3, -2.0, 5.5]);
        assert_eq!(k.eval(&x, &x), 1.0);
    }

    #[test]
    fn linear_decision_matches_explicit_expansion() {
        let vectors = dense(&[&[0.0, 0.2], &[0.3, 0.1], &[1.0, 0.8], &[0.9, 1.2]]);
        let labels = [false, false, true, true];
        let model = train_svm(&vectors, &labels, Kernel::Linear, 5.0, 1e-8).unwrap();
        // w = sum of coef * sv
        let mut w = [0.0f64; 2];
        for (sv, coef) in model.support_vectors.iter().zip(&model.dual_coef) {
            for &(i, v) in sv.entries() {
                w[i as usize] += coef * v;
            }
        }
        for probe in [[0.5, 0.5], [-1.0, 2.0], [0.1, 0.9]] {
            let x = DocVector::dense(&probe);
            let explicit = w[0] * probe[0] + w[1] * probe[1] + model.bias;
            assert_abs_diff_eq!(
                decision_value(&model, &x).unwrap(),
                explicit,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn duplicating_training_points_leaves_decisions_unchanged() {
        let base = dense(&[&[0.0, 0.0], &[0.2, 0.1], &[1.0, 1.0], &[0.9, 1.2]]);
        let labels = [false, false, true, true];
        let model_a = train_svm(&base, &labels, Kernel::Rbf { gamma: 1.0 }, 1e6, 1e-9).unwrap();

        let mut doubled = base.clone();
        doubled.extend(base.iter().cloned());
        let mut labels2 = labels.to_vec();
        labels2.extend_from_slice(&labels);
        let model_b = train_svm(&doubled, &labels2, Kernel::Rbf { gamma: 1.0 }, 1e6, 1e-9).unwrap();

        for gx in 0..5 {
            for gy in 0..5 {
                let probe = DocVector::dense(&[gx as f64 / 4.0, gy as f64 / 4.0]);
                let fa = decision_value(&model_a, &probe).unwrap();
                let fb = decision_value(&model_b, &probe).unwrap();
                assert_abs_diff_eq!(fa, fb, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn training_order_does_not_change_predictions() {
        let vectors = dense(&[
            &[0.0, 0.0],
            &[0.1, 0.3],
            &[0.2, 0.1],
            &[1.0, 1.1],
            &[0.9, 0.8],
            &[1.2, 1.0],
        ]);
        let labels = [false, false, false, true, true, true];
        let model_a = train_svm(&vectors, &labels, Kernel::Rbf { gamma: 1.0 }, 10.0, 1e-9).unwrap();

        let perm = [4, 0, 5, 2, 1, 3];
        let pv: Vec<DocVector> = perm.iter().map(|&i| vectors[i].clone()).collect();
        let pl: Vec<bool> = perm.iter().map(|&i| labels[i]).collect();
        let model_b = train_svm(&pv, &pl, Kernel::Rbf { gamma: 1.0 }, 10.0, 1e-9).unwrap();

        for gx in 0..5 {
            for gy in 0..5 {
                let probe = DocVector::dense(&[gx as f64 / 4.0, gy as f64 / 4.0]);
                let fa = decision_value(&model_a, &probe).unwrap();
                let fb = decision_value(&model_b, &probe).unwrap();
                assert_abs_diff_eq!(fa, fb, epsilon = 1e-6);
                assert_eq!(fa >= 0.0, fb >= 0.0);
            }
        }
    }

    #[test]
    fn objective_is_monotone_nonincreasing() {
        let vectors = dense(&[
            &[0.0, 0.0],
            &[0.4, 0.2],
            &[0.3, 0.5],
            &[1.0, 1.1],
            &[0.8, 0.7],
            &[1.3, 0.9],
        ]);
        let labels = [false, false, false, true, true, true];
        let (_, trace) =
            train_traced(&vectors, &labels, Kernel::Rbf { gamma: 2.0 }, 5.0, 1e-8).unwrap();
        assert!(trace.len() > 1);
        for pair in trace.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-9,
                "objective rose: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn evaluate_confusion_matrix() {
        // model predicting sign(x - 0.5) through an explicit linear model
        let model = SvmModel {
            support_vectors: vec![DocVector::dense(&[1.0])],
            dual_coef: vec![1.0],
            bias: -0.5,
            kernel: Kernel::Linear,
            c: 1.0,
            dim: 1,
        };
        // tp=2, fp=1, tn=3, fn=2
        let vectors = dense(&[
            &[1.0],
            &[1.0],
            &[1.0],
            &[0.0],
            &[0.0],
            &[0.0],
            &[0.0],
            &[0.0],
        ]);
        let labels = [true, true, false, true, true, false, false, false];
        let report = evaluate(&model, &vectors, &labels).unwrap();
        assert_eq!(report.true_positives, 2);
        assert_eq!(report.false_positives, 1);
        assert_eq!(report.true_negatives, 3);
        assert_eq!(report.false_negatives, 2);
        assert_abs_diff_eq!(report.accuracy, 0.625, epsilon = 1e-12);
        assert_abs_diff_eq!(report.precision.unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.recall.unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_ratios_are_absent() {
        // everything predicted positive
        let model = SvmModel {
            support_vectors: vec![],
            dual_coef: vec![],
            bias: 1.0,
            kernel: Kernel::Linear,
            c: 1.0,
            dim: 1,
        };
        let vectors = dense(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let labels = [true, false, true, false];
        let report = evaluate(&model, &vectors, &labels).unwrap();
        assert_abs_diff_eq!(report.precision.unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(report.recall.unwrap(), 1.0, epsilon = 1e-12);

        // everything predicted negative: precision undefined
        let never = SvmModel {
            bias: -1.0,
            ..model
        };
        let report = evaluate(&never, &vectors, &labels).unwrap();
        assert!(report.precision.is_none());
        assert_eq!(report.recall, Some(0.0));
    }

    #[test]
    fn error_paths() {
        let vectors = dense(&[&[0.0], &[1.0]]);
        assert!(matches!(
            train_svm(&vectors, &[true, true], Kernel::Linear, 1.0, 1e-3),
            Err(SvmError::SingleClass)
        ));
        assert!(matches!(
            train_svm(&[], &[], Kernel::Linear, 1.0, 1e-3),
            Err(SvmError::EmptyTrainingSet)
        ));
        let model = train_svm(&vectors, &[false, true], Kernel::Linear, 1.0, 1e-3).unwrap();
        assert!(matches!(
            decision_value(&model, &DocVector::dense(&[1.0, 2.0])),
            Err(SvmError::DimMismatch {
                expected: 1,
                got: 2
            })
        ));
        assert!(matches!(
            evaluate(&model, &[], &[]),
            Err(SvmError::EmptyTestSet)
        ));
    }

    #[test]
    fn model_save_load_roundtrip() {
        let vectors = dense(&[&[0.0, 0.1], &[0.3, 0.0], &[1.0, 0.9], &[0.8, 1.1]]);
        let labels = [false, false, true, true];
        let model = train_svm(&vectors, &labels, Kernel::Rbf { gamma: 0.8 }, 2.0, 1e-6).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        model.save(&path).unwrap();
        let back = SvmModel::load(&path).unwrap();
        assert_eq!(back.kernel, model.kernel);
        assert_eq!(back.dim, model.dim);
        assert_eq!(back.dual_coef, model.dual_coef);
        for gx in 0..4 {
            let probe = DocVector::dense(&[gx as f64 / 3.0, 0.5]);
            assert_eq!(
                decision_value(&model, &probe).unwrap(),
                decision_value(&back, &probe).unwrap()
            );
        }
    }

    #[test]
    fn labels_posts_deterministically() {
        use crate::corpus::synth::{synth_corpus, SynthSpec};
        use crate::features::{fit_feature_space, transform_many};

        let spec = SynthSpec {
            n_posts: 160,
            ..SynthSpec::default()
        };
        let posts = synth_corpus(&spec, 23);
        let docs: Vec<Vec<String>> = posts.iter().map(|p| p.tokens.clone()).collect();
        let truth: Vec<bool> = posts.iter().map(|p| p.label == Label::Influenza).collect();
        let space = fit_feature_space(&docs, &truth, 40).unwrap();
        let vectors = transform_many(&docs, &space);
        let kernel = Kernel::Rbf {
            gamma: 1.0 / space.dim() as f64,
        };
        let model = train_svm(&vectors, &truth, kernel, 1.0, 1e-3).unwrap();

        let unlabeled: Vec<Post> = posts
            .iter()
            .map(|p| Post {
                label: Label::Unlabeled,
                ..p.clone()
            })
            .collect();
        let labeled = label_corpus(&model, &unlabeled, &space).unwrap();
        assert_eq!(labeled.len(), posts.len());
        assert!(labeled.iter().all(|p| p.label != Label::Unlabeled));
        let again = label_corpus(&model, &unlabeled, &space).unwrap();
        for (a, b) in labeled.iter().zip(&again) {
            assert_eq!(a.label, b.label);
        }
        let agree = labeled
            .iter()
            .zip(&posts)
            .filter(|(a, b)| a.label == b.label)
            .count();
        assert!(
            agree as f64 / posts.len() as f64 >= 0.95,
            "agreement {agree}/{}",
            posts.len()
        );

        assert!(label_corpus(&model, &[], &space).unwrap().is_empty());
    }
}
