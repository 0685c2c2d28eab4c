//! Feature selection and SVM training on a synthetic labeled corpus.
//!
//! Draws a corpus with known labels, sweeps the feature-count grid with a
//! held-out split, refits at the winning size, and reports hold-out
//! accuracy alongside the confusion counts.

use flusig::classifier::{evaluate, train_svm, Kernel};
use flusig::corpus::synth::{synth_corpus, SynthSpec};
use flusig::corpus::Label;
use flusig::features::{
    fit_feature_space, stratified_split, sweep_dimensions, transform_many, SweepEval,
};

fn main() {
    let spec = SynthSpec {
        n_posts: 600,
        ..SynthSpec::default()
    };
    let posts = synth_corpus(&spec, 7);
    let docs: Vec<Vec<String>> = posts.iter().map(|p| p.tokens.clone()).collect();
    let labels: Vec<bool> = posts.iter().map(|p| p.label == Label::Influenza).collect();
    println!(
        "corpus: {} posts, {} influenza",
        posts.len(),
        labels.iter().filter(|&&l| l).count()
    );

    // grid search over feature counts, each scored on a stratified hold-out
    let eval = SweepEval {
        seed: 11,
        ..SweepEval::default()
    };
    let sweep = sweep_dimensions(&docs, &labels, &[20, 40, 80], &eval).unwrap();
    println!("\n    k   dim   train    test");
    for row in &sweep.rows {
        println!(
            "  {:>3} {:>5}   {:.3}   {:.3}",
            row.k, row.selected_dim, row.train_accuracy, row.test_accuracy
        );
    }
    println!("best k: {}", sweep.best_k);

    // refit at the winner and confirm on a fresh split
    let (train_idx, test_idx) = stratified_split(&labels, 0.2, 99);
    let train_docs: Vec<Vec<String>> = train_idx.iter().map(|&i| docs[i].clone()).collect();
    let train_labels: Vec<bool> = train_idx.iter().map(|&i| labels[i]).collect();
    let space = fit_feature_space(&train_docs, &train_labels, sweep.best_k).unwrap();

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

    println!(
        "\nhold-out: accuracy {:.3}, precision {}, recall {}",
        report.accuracy,
        report.precision.map_or("n/a".into(), |v| format!("{v:.3}")),
        report.recall.map_or("n/a".into(), |v| format!("{v:.3}")),
    );
    println!(
        "confusion: tp {} fp {} tn {} fn {}",
        report.true_positives,
        report.false_positives,
        report.true_negatives,
        report.false_negatives
    );
}
