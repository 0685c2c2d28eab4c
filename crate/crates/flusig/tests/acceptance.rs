//! Acceptance gates for the surveillance pipeline.
//!
//! Each criterion prints one PASS/SKIP line describing what was checked,
//! so a test run doubles as a checklist. The gates cover, in order: the
//! chi-square oracle against a frozen reference table, classifier quality
//! plus an independent dual-solver oracle, embedding gradient exactness,
//! regression numerics and the carry-adjustment gain, replication against
//! an externally supplied weekly series (skipped when absent), exact
//! analytics identities, and byte-identical pipeline reruns.

use std::time::Instant;

use flusig::analytics::{
    adjust_irt, chi_square, incentive_ratio, pearson, pirt_ratio, CarryMode, ContingencyTable,
    KeywordSet,
};
use flusig::classifier::{decision_value, evaluate, train_svm, Kernel};
use flusig::corpus::synth::{synth_corpus, synth_weekly, SeriesSpec, SynthSpec};
use flusig::corpus::{Label, Region, SeasonMap, Week, WeeklySeries};
use flusig::features::{fit_feature_space, stratified_split, transform_many, DocVector};
use flusig::gam::{fit_nbgam, nb_deviance, run_model_suite, ModelSpec, DEFAULT_BASIS_DIM};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Reference polarity-by-region contingency fixture with frozen expected
/// counts. The positive/negative observed cells and the row totals are
/// published surveillance figures; the neutral column is the remainder
/// that makes the expected values reproducible.
const NORTH_POS: u64 = 87_264;
const NORTH_NEG: u64 = 374_173;
const NORTH_TOTAL: u64 = 512_836;
const SOUTH_POS: u64 = 221_142;
const SOUTH_NEG: u64 = 939_864;
const SOUTH_TOTAL: u64 = 1_299_041;

#[test]
fn criterion_1_polarity_chi_square_reproduces_reference_expected_counts() {
    let table = ContingencyTable::new(
        vec!["north", "south"],
        vec!["positive", "negative", "neutral"],
        vec![
            vec![NORTH_POS, NORTH_NEG, NORTH_TOTAL - NORTH_POS - NORTH_NEG],
            vec![SOUTH_POS, SOUTH_NEG, SOUTH_TOTAL - SOUTH_POS - SOUTH_NEG],
        ],
    )
    .unwrap();

    let started = Instant::now();
    let result = chi_square(&table).unwrap();
    let elapsed = started.elapsed();

    let checks = [
        (result.expected[0][0], 87_291.63),
        (result.expected[0][1], 371_926.73),
        (result.expected[1][0], 221_114.37),
        (result.expected[1][1], 942_110.27),
    ];
    for (got, want) in checks {
        assert!(
            (got - want).abs() <= 0.01,
            "expected cell {got:.4} should be {want:.2}"
        );
    }
    assert_eq!(result.dof, 2);
    assert!(result.p_value < 0.001, "p {:.3e}", result.p_value);
    assert!(
        elapsed.as_micros() < 1000,
        "chi-square took {elapsed:?}, budget 1 ms"
    );
    println!(
        "criterion 1: PASS - four expected counts within 0.01, p {:.1e} < 0.001, {} us",
        result.p_value,
        elapsed.as_micros()
    );
}

/// Brute-force solver for the SVM dual, written against raw float
/// vectors so it shares no code with the production solver. It
/// enumerates every assignment of the points to {alpha = 0, alpha = C,
/// free}, solves the KKT equality system for the free block, and keeps
/// the first assignment whose solution satisfies all KKT conditions:
/// exact for the handful of points used here.
type RawKernel = fn(&[f64], &[f64], f64) -> f64;

struct OracleSvm {
    alpha: Vec<f64>,
    bias: f64,
    y: Vec<f64>,
    points: Vec<Vec<f64>>,
    kernel: RawKernel,
    gamma: f64,
}

fn linear_kernel(a: &[f64], b: &[f64], _gamma: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p][col].abs().partial_cmp(&a[q][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        let pivot_b = b[col];
        for row in col + 1..n {
            let f = a[row][col] / pivot_row[col];
            for (entry, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *entry -= f * p;
            }
            b[row] -= f * pivot_b;
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn solve_dual_oracle(
    points: &[Vec<f64>],
    y: &[f64],
    kernel: RawKernel,
    gamma: f64,
    c: f64,
) -> OracleSvm {
    let n = points.len();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            q[i][j] = y[i] * y[j] * kernel(&points[i], &points[j], gamma);
        }
    }
    const BOX_TOL: f64 = 1e-9;
    const KKT_TOL: f64 = 1e-7;

    // each point is at the lower bound (0), the upper bound (C), or free;
    // assignments with more free points come first because any free point
    // pins the bias multiplier, which all optima share
    let mut assignments: Vec<usize> = (0..3usize.pow(n as u32)).collect();
    let free_count = |a: usize| {
        (0..n)
            .filter(|&i| a / 3usize.pow(i as u32) % 3 == 2)
            .count()
    };
    assignments.sort_by_key(|&a| std::cmp::Reverse(free_count(a)));
    for assignment in assignments {
        let state: Vec<usize> = (0..n)
            .map(|i| assignment / 3usize.pow(i as u32) % 3)
            .collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state
            .iter()
            .map(|&s| if s == 1 { c } else { 0.0 })
            .collect();
        let m = free.len();

        // the multiplier of the balance constraint y.alpha = 0 equals the
        // bias: stationarity at a free point i reads
        // sum_j Q_ij alpha_j + mu y_i = 1, i.e. y_i f(x_i) = 1 with b = mu
        let mu = if m > 0 {
            let mut mat = vec![vec![0.0; m + 1]; m + 1];
            let mut rhs = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (col, &j) in free.iter().enumerate() {
                    mat[r][col] = q[i][j];
                }
                mat[r][m] = y[i];
                rhs[r] = 1.0
                    - (0..n)
                        .filter(|&j| state[j] == 1)
                        .map(|j| q[i][j] * c)
                        .sum::<f64>();
            }
            for (col, &j) in free.iter().enumerate() {
                mat[m][col] = y[j];
            }
            rhs[m] = -(0..n)
                .filter(|&j| state[j] == 1)
                .map(|j| y[j] * c)
                .sum::<f64>();
            let Some(solution) = solve_linear(mat, rhs) else {
                continue;
            };
            // a free point must land strictly inside the box; one on the
            // boundary belongs to an at-bound assignment, where the bias
            // is an interval rather than pinned
            let interior = 1e-8 * (1.0 + c);
            if solution[..m]
                .iter()
                .any(|&a| !(interior..=c - interior).contains(&a))
            {
                continue;
            }
            for (col, &i) in free.iter().enumerate() {
                alpha[i] = solution[col];
            }
            solution[m]
        } else {
            let balance: f64 = (0..n).map(|i| y[i] * alpha[i]).sum();
            if balance.abs() > BOX_TOL * (1.0 + c) {
                continue;
            }
            f64::NAN // fixed up below from the interval of valid multipliers
        };

        // remaining KKT conditions: g_i + mu y_i >= 0 at the lower bound
        // and <= 0 at the upper bound, where g = Q alpha - 1
        let g: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| q[i][j] * alpha[j]).sum::<f64>() - 1.0)
            .collect();
        let mut mu_lo = f64::NEG_INFINITY;
        let mut mu_hi = f64::INFINITY;
        for i in 0..n {
            if state[i] == 2 {
                continue;
            }
            // bound on mu from sign(y_i) and which box face alpha_i sits on
            let limit = -y[i] * g[i];
            let wants_lower = (state[i] == 0) == (y[i] > 0.0);
            if wants_lower {
                mu_lo = mu_lo.max(limit);
            } else {
                mu_hi = mu_hi.min(limit);
            }
        }
        let bias = if m > 0 {
            if mu < mu_lo - KKT_TOL || mu > mu_hi + KKT_TOL {
                continue;
            }
            mu
        } else {
            if mu_lo > mu_hi + KKT_TOL {
                continue;
            }
            // same degenerate-case convention as the trained model: the
            // midpoint of the interval of multipliers satisfying KKT
            (mu_lo + mu_hi) / 2.0
        };

        return OracleSvm {
            alpha,
            bias,
            y: y.to_vec(),
            points: points.to_vec(),
            kernel,
            gamma,
        };
    }
    panic!("no KKT point found over {n} points");
}

impl OracleSvm {
    fn decision(&self, x: &[f64]) -> f64 {
        let s: f64 = self
            .points
            .iter()
            .zip(self.alpha.iter().zip(&self.y))
            .map(|(p, (a, yy))| a * yy * (self.kernel)(p, x, self.gamma))
            .sum();
        s + self.bias
    }
}

#[test]
fn criterion_2_classifier_accuracy_and_small_instance_dual_oracle() {
    let started = Instant::now();

    // held-out accuracy on a seeded synthetic corpus of 2000 posts
    let spec = SynthSpec {
        n_posts: 2000,
        ..SynthSpec::default()
    };
    let posts = synth_corpus(&spec, 17);
    let docs: Vec<Vec<String>> = posts.iter().map(|p| p.tokens.clone()).collect();
    let labels: Vec<bool> = posts.iter().map(|p| p.label == Label::Influenza).collect();
    let (train_idx, test_idx) = stratified_split(&labels, 0.2, 17);
    let train_docs: Vec<Vec<String>> = train_idx.iter().map(|&i| docs[i].clone()).collect();
    let train_labels: Vec<bool> = train_idx.iter().map(|&i| labels[i]).collect();
    let space = fit_feature_space(&train_docs, &train_labels, 50).unwrap();
    let gamma = 1.0 / space.dim() as f64;
    let model = train_svm(
        &transform_many(&train_docs, &space),
        &train_labels,
        Kernel::Rbf { gamma },
        1.0,
        1e-3,
    )
    .unwrap();
    let test_docs: Vec<Vec<String>> = test_idx.iter().map(|&i| docs[i].clone()).collect();
    let test_labels: Vec<bool> = test_idx.iter().map(|&i| labels[i]).collect();
    let report = evaluate(&model, &transform_many(&test_docs, &space), &test_labels).unwrap();
    assert!(
        report.accuracy >= 0.95,
        "hold-out accuracy {:.3} below 0.95",
        report.accuracy
    );

    // every generated instance of 2..=6 points must match an
    // independently coded dual solver on decision values
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut instances = 0;
    let mut worst: f64 = 0.0;
    for n in 2..=6usize {
        for trial in 0..3 {
            for (kernel_id, c) in [(0usize, 10.0), (1usize, 1.0)] {
                let dim = 2 + (trial % 2);
                let points: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
                    .collect();
                // force both classes to be present
                let y: Vec<f64> = (0..n)
                    .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
                    .collect();
                let labels: Vec<bool> = y.iter().map(|&v| v > 0.0).collect();
                let vectors: Vec<DocVector> = points.iter().map(|p| DocVector::dense(p)).collect();

                let gamma = 0.7;
                let (kernel, oracle_kernel): (Kernel, RawKernel) = if kernel_id == 0 {
                    (Kernel::Linear, linear_kernel)
                } else {
                    (Kernel::Rbf { gamma }, rbf_kernel)
                };
                let model = train_svm(&vectors, &labels, kernel, c, 1e-6).unwrap();
                let oracle = solve_dual_oracle(&points, &y, oracle_kernel, gamma, c);

                let mut probes: Vec<Vec<f64>> = points.clone();
                for _ in 0..4 {
                    probes.push((0..dim).map(|_| rng.random_range(-2.5..2.5)).collect());
                }
                for probe in &probes {
                    let got = decision_value(&model, &DocVector::dense(probe)).unwrap();
                    let want = oracle.decision(probe);
                    let diff = (got - want).abs();
                    worst = worst.max(diff);
                    assert!(
                        diff <= 1e-3,
                        "n={n} kernel={kernel_id} decision {got:.6} vs oracle {want:.6}"
                    );
                }
                instances += 1;
            }
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 60 s");
    println!(
        "criterion 2: PASS - hold-out accuracy {:.3} >= 0.95; {} small instances within 1e-3 \
         of the dual oracle (worst {:.2e}), {:.1} s",
        report.accuracy,
        instances,
        worst,
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_3_embedding_gradients_and_planted_pair() {
    use flusig::embeddings::{most_similar, pair_gradients, pair_loss, train_sgns, SgnsParams};

    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let d = 8;
    let h = 1e-5;
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;

    for _ in 0..100 {
        let rand_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        let center = rand_vec(&mut rng);
        let positive = rand_vec(&mut rng);
        let negatives: Vec<Vec<f64>> = (0..3).map(|_| rand_vec(&mut rng)).collect();
        let neg_refs: Vec<&[f64]> = negatives.iter().map(|v| v.as_slice()).collect();
        let grads = pair_gradients(&center, &positive, &neg_refs);

        let mut check = |analytic: f64, plus: f64, minus: f64| {
            let fd = (plus - minus) / (2.0 * h);
            let rel = (analytic - fd).abs() / f64::max(1e-6, analytic.abs().max(fd.abs()));
            worst = worst.max(rel);
            assert!(rel <= 1e-4, "gradient {analytic:.8} vs fd {fd:.8}");
            checked += 1;
        };

        let loss_at = |c: &[f64], p: &[f64], ns: &[Vec<f64>]| -> f64 {
            let refs: Vec<&[f64]> = ns.iter().map(|v| v.as_slice()).collect();
            pair_loss(c, p, &refs)
        };
        for i in 0..d {
            let mut up = center.clone();
            let mut dn = center.clone();
            up[i] += h;
            dn[i] -= h;
            check(
                grads.center[i],
                loss_at(&up, &positive, &negatives),
                loss_at(&dn, &positive, &negatives),
            );

            let mut up = positive.clone();
            let mut dn = positive.clone();
            up[i] += h;
            dn[i] -= h;
            check(
                grads.positive[i],
                loss_at(&center, &up, &negatives),
                loss_at(&center, &dn, &negatives),
            );

            for (t, negative) in negatives.iter().enumerate() {
                let mut up_set = negatives.clone();
                let mut dn_set = negatives.clone();
                up_set[t] = {
                    let mut v = negative.clone();
                    v[i] += h;
                    v
                };
                dn_set[t] = {
                    let mut v = negative.clone();
                    v[i] -= h;
                    v
                };
                check(
                    grads.negatives[t][i],
                    loss_at(&center, &positive, &up_set),
                    loss_at(&center, &positive, &dn_set),
                );
            }
        }
    }

    // a pair that co-occurs only with itself becomes each other's nearest
    // neighbor; background words rotate through their own sentences
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let filler: Vec<String> = (0..10).map(|i| format!("w{i:02}")).collect();
    let mut corpus = Vec::new();
    for _ in 0..90 {
        corpus.push(vec!["signalx".to_string(), "signaly".to_string()]);
        let sentence: Vec<String> = (0..5)
            .map(|_| filler[rng.random_range(0..filler.len())].clone())
            .collect();
        corpus.push(sentence);
    }
    let params = SgnsParams {
        dim: 16,
        window: 2,
        negatives: 4,
        epochs: 8,
        min_count: 1,
        learning_rate: 0.05,
    };
    let model = train_sgns(&corpus, &params, 42).unwrap();
    let top = most_similar(&model, "signalx", 1).unwrap();
    assert_eq!(top[0].0, "signaly", "neighbors {top:?}");
    let top = most_similar(&model, "signaly", 1).unwrap();
    assert_eq!(top[0].0, "signalx", "neighbors {top:?}");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget 120 s");
    println!(
        "criterion 3: PASS - {checked} gradient coordinates within 1e-4 of finite differences \
         (worst {worst:.2e}); planted pair is rank-1 both ways, {:.1} s",
        elapsed.as_secs_f64()
    );
}

#[test]
fn criterion_4_regression_numerics_and_carry_adjustment_gain() {
    let started = Instant::now();

    // (a) the penalized log-likelihood never decreases across iterations
    let mut fits = 0usize;
    for seed in 0..20u64 {
        let series = adjust_irt(&synth_weekly(&SeriesSpec::default(), seed), CarryMode::Add);
        let fit = fit_nbgam(&series, ModelSpec::SmoothLag, DEFAULT_BASIS_DIM, None).unwrap();
        for pair in fit.penalized_trace.windows(2) {
            assert!(
                pair[1] >= pair[0] - 1e-9 * (1.0 + pair[0].abs()),
                "seed {seed}: trace fell {} -> {}",
                pair[0],
                pair[1]
            );
        }
        fits += 1;
    }

    // (b) an effectively infinite penalty leaves a straight line
    let series = adjust_irt(&synth_weekly(&SeriesSpec::default(), 77), CarryMode::Add);
    let flat = fit_nbgam(
        &series,
        ModelSpec::SmoothOnly,
        DEFAULT_BASIS_DIM,
        Some(1e12),
    )
    .unwrap();
    let smooth = flat.smooth.as_ref().unwrap();
    let n = smooth.x.len() as f64;
    let mx = smooth.x.iter().sum::<f64>() / n;
    let my = smooth.value.iter().sum::<f64>() / n;
    let sxx: f64 = smooth.x.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = smooth
        .x
        .iter()
        .zip(&smooth.value)
        .map(|(x, v)| (x - mx) * (v - my))
        .sum();
    let slope = sxy / sxx;
    let max_dev = smooth
        .x
        .iter()
        .zip(&smooth.value)
        .map(|(x, v)| (v - (my + slope * (x - mx))).abs())
        .fold(0.0, f64::max);
    assert!(
        max_dev < 1e-4,
        "smooth deviates from a line by {max_dev:.2e}"
    );

    // (c) at huge dispersion the deviance collapses to the Poisson one
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let y: Vec<f64> = (0..50).map(|_| rng.random_range(0..40) as f64).collect();
    let mu: Vec<f64> = y.iter().map(|v| v * 0.8 + 1.3).collect();
    let nb = nb_deviance(&y, &mu, 1e8);
    let poisson: f64 = y
        .iter()
        .zip(&mu)
        .map(|(&yi, &mi)| {
            let term = if yi > 0.0 { yi * (yi / mi).ln() } else { 0.0 };
            2.0 * (term - (yi - mi))
        })
        .sum();
    let rel = ((nb - poisson) / poisson).abs();
    assert!(rel < 1e-4, "nb {nb:.6} vs poisson {poisson:.6}");

    // (d) under a planted one-week carry mechanism, the adjusted
    // covariate must beat the raw one on median deviance explained
    let mut raw_de = Vec::new();
    let mut adj_de = Vec::new();
    for seed in 100..120u64 {
        let series = adjust_irt(&synth_weekly(&SeriesSpec::default(), seed), CarryMode::Add);
        let raw = fit_nbgam(&series, ModelSpec::SmoothLag, DEFAULT_BASIS_DIM, None).unwrap();
        let adj = fit_nbgam(
            &series,
            ModelSpec::AdjustedSmoothLag,
            DEFAULT_BASIS_DIM,
            None,
        )
        .unwrap();
        raw_de.push(raw.metrics.deviance_explained);
        adj_de.push(adj.metrics.deviance_explained);
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let raw_median = median(&mut raw_de);
    let adj_median = median(&mut adj_de);
    assert!(
        adj_median > raw_median,
        "adjusted median {adj_median:.4} not above raw {raw_median:.4}"
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}, budget 5 min");
    println!(
        "criterion 4: PASS - {fits} monotone traces; max line deviation {max_dev:.1e}; \
         Poisson limit rel {rel:.1e}; adjusted median DE {adj_median:.3} > raw {raw_median:.3}, \
         {:.1} s",
        elapsed.as_secs_f64()
    );
}

/// Replication against an externally supplied weekly series. Points the
/// FLUSIG_WEEKLY_CSV environment variable at a CSV with a
/// `week,region,irt,pirt,ili_pct` header (weeks like 2016-W04, regions
/// north/south) to enable it; without the file the criterion is skipped.
#[test]
fn criterion_5_external_weekly_series_replication() {
    let Some(path) = std::env::var_os("FLUSIG_WEEKLY_CSV") else {
        println!("criterion 5: SKIP - external weekly series not supplied (set FLUSIG_WEEKLY_CSV)");
        return;
    };
    let body = std::fs::read_to_string(&path).expect("readable weekly series CSV");
    let mut rows = Vec::new();
    for (i, line) in body.lines().enumerate() {
        if i == 0 {
            assert_eq!(
                line.trim(),
                "week,region,irt,pirt,ili_pct",
                "unexpected header"
            );
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        assert_eq!(parts.len(), 5, "line {}: {line:?}", i + 1);
        rows.push((
            Week::parse(parts[0]).unwrap(),
            Region::parse(parts[1]).unwrap(),
            parts[2].parse::<u32>().unwrap(),
            parts[3].parse::<u32>().unwrap(),
            parts[4].parse::<f64>().unwrap(),
        ));
    }
    let build = |region: Region| -> WeeklySeries {
        let picked: Vec<_> = rows.iter().filter(|r| r.1 == region).collect();
        assert!(!picked.is_empty(), "no rows for {region}");
        WeeklySeries {
            region,
            weeks: picked.iter().map(|r| r.0).collect(),
            irt: picked.iter().map(|r| r.2).collect(),
            pirt: picked.iter().map(|r| r.3).collect(),
            adjusted_irt: None,
            ili: picked.iter().map(|r| r.4).collect(),
        }
    };
    let north = adjust_irt(&build(Region::North), CarryMode::Add);
    let south = adjust_irt(&build(Region::South), CarryMode::Add);
    let suite = run_model_suite(&north, &south, DEFAULT_BASIS_DIM).unwrap();

    let find = |region: Region, spec: ModelSpec| {
        suite
            .rows
            .iter()
            .find(|r| r.region == region && r.spec == spec)
            .unwrap()
    };
    let lag_de = find(Region::North, ModelSpec::LagOnly).deviance_explained;
    assert!(
        (lag_de - 0.532).abs() <= 0.05,
        "north lag-only deviance explained {lag_de:.3} outside 0.532 +/- 0.05"
    );
    for region in [Region::North, Region::South] {
        let aic = |spec: ModelSpec| find(region, spec).aic;
        assert!(
            aic(ModelSpec::AdjustedSmoothLag) < aic(ModelSpec::SmoothLag)
                && aic(ModelSpec::SmoothLag) < aic(ModelSpec::SmoothOnly)
                && aic(ModelSpec::SmoothOnly) < aic(ModelSpec::LagOnly),
            "{region}: AIC ordering differs from the reference ranking"
        );
    }
    println!(
        "criterion 5: PASS - north lag-only deviance explained {lag_de:.3} within 0.05 of \
         0.532; AIC ranks models identically in both regions"
    );
}

#[test]
fn criterion_6_analytics_identities() {
    let started = Instant::now();

    // Pearson r is exactly +/-1 on (anti)proportional integer series
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let anti: Vec<f64> = x.iter().map(|v| -v).collect();
    assert_eq!(pearson(&x, &x).unwrap().r, 1.0);
    assert_eq!(pearson(&x, &anti).unwrap().r, -1.0);

    // carry adjustment is the identity when nothing is prolonged
    let weeks: Vec<Week> = {
        let mut w = Week::new(2016, 1).unwrap();
        (0..6)
            .map(|_| {
                let cur = w;
                w = w.next();
                cur
            })
            .collect()
    };
    let series = WeeklySeries {
        region: Region::North,
        weeks: weeks.clone(),
        irt: vec![10, 20, 30, 40, 50, 60],
        pirt: vec![0; 6],
        adjusted_irt: None,
        ili: vec![1.0; 6],
    };
    for mode in [CarryMode::Add, CarryMode::Move] {
        let adjusted = adjust_irt(&series, mode);
        assert_eq!(adjusted.adjusted_irt.as_ref().unwrap(), &series.irt);
    }

    // carried totals are conserved exactly: the final week's prolonged
    // count is the only mass with nowhere to go
    let series = WeeklySeries {
        region: Region::South,
        weeks,
        irt: vec![100, 80, 120, 90, 110, 70],
        pirt: vec![25, 10, 60, 5, 40, 30],
        adjusted_irt: None,
        ili: vec![1.0; 6],
    };
    let total = |v: &[u32]| v.iter().map(|&x| u64::from(x)).sum::<u64>();
    let added = adjust_irt(&series, CarryMode::Add);
    assert_eq!(
        total(added.adjusted_irt.as_ref().unwrap()),
        total(&series.irt) + total(&series.pirt) - u64::from(*series.pirt.last().unwrap())
    );
    let moved = adjust_irt(&series, CarryMode::Move);
    assert_eq!(
        total(moved.adjusted_irt.as_ref().unwrap()),
        total(&series.irt) - u64::from(*series.pirt.last().unwrap())
    );

    // prolonged-share ratios on a hand-built series are exact dyadics
    let ratios = pirt_ratio(&series);
    assert_eq!(ratios[&series.weeks[0]], 0.25);
    assert_eq!(ratios[&series.weeks[2]], 0.5);

    // treatment-seeking shares on four hand-built posts
    use chrono::{FixedOffset, TimeZone};
    let tz = FixedOffset::east_opt(8 * 3600).unwrap();
    let post = |id: &str, region: Region, month: u32, text: &str| flusig::corpus::Post {
        id: id.to_string(),
        timestamp: tz.with_ymd_and_hms(2016, month, 10, 12, 0, 0).unwrap(),
        province: "demo".to_string(),
        region: Some(region),
        text: text.to_string(),
        tokens: vec![],
        label: Label::Influenza,
    };
    let hospital = KeywordSet::new(flusig::analytics::KeywordRole::Hospital, ["clinic"]).unwrap();
    let posts = [
        post("a", Region::North, 1, "went to the clinic today"),
        post("b", Region::North, 1, "resting at home"),
        post("c", Region::North, 1, "no doctors for me"),
        post("d", Region::South, 7, "clinic again"),
    ];
    let shares = incentive_ratio(&posts, &hospital, &SeasonMap::default()).unwrap();
    assert_eq!(shares.len(), 2);
    let north_winter = shares
        .iter()
        .find(|((r, _), _)| *r == Region::North)
        .unwrap();
    assert_eq!(*north_winter.1, 1.0 / 3.0);
    let south_summer = shares
        .iter()
        .find(|((r, _), _)| *r == Region::South)
        .unwrap();
    assert_eq!(*south_summer.1, 1.0);

    let elapsed = started.elapsed();
    assert!(elapsed.as_millis() < 1000, "took {elapsed:?}, budget 1 s");
    println!(
        "criterion 6: PASS - exact r = +/-1, zero-carry identity, conservation, and \
         hand-computed ratios, {} ms",
        elapsed.as_millis()
    );
}

#[test]
fn criterion_7_report_reruns_are_byte_identical() {
    use std::collections::BTreeMap;
    use std::path::Path;
    use std::process::Command;

    let started = Instant::now();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/config.toml");
    assert!(config.is_file(), "shipped fixture config missing");

    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("run_a");
    let out_b = tmp.path().join("run_b");
    for out in [&out_a, &out_b] {
        let status = Command::new(env!("CARGO_BIN_EXE_flusig"))
            .args(["report", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success(), "report run failed");
    }

    fn collect(root: &Path, dir: &Path, files: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                collect(root, &path, files);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                files.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut files_a = BTreeMap::new();
    let mut files_b = BTreeMap::new();
    collect(&out_a, &out_a, &mut files_a);
    collect(&out_b, &out_b, &mut files_b);

    let names_a: Vec<&String> = files_a.keys().collect();
    let names_b: Vec<&String> = files_b.keys().collect();
    assert_eq!(names_a, names_b, "output trees list different files");
    let mut identical = 0usize;
    for (name, bytes) in &files_a {
        assert_eq!(bytes, &files_b[name], "{name} differs between reruns");
        identical += 1;
    }
    assert!(identical > 20, "only {identical} files produced");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 600, "took {elapsed:?}, budget 10 min");
    println!(
        "criterion 7: PASS - two pipeline runs produced {identical} byte-identical files, \
         {:.1} s",
        elapsed.as_secs_f64()
    );
}
