//! The whole surveillance pipeline against a generated input set.
//!
//! Writes a self-contained fixture directory (posts, training labels,
//! incidence, dictionaries, config), then runs classification, embedding,
//! sentiment analytics, and regression exactly as the command-line tool
//! would, reading back a few of the written artifacts.

use std::fs;
use std::path::PathBuf;

use flusig::pipeline::{cmd_report, load_config, write_fixture_set, Overrides};

fn main() {
    let base = std::env::temp_dir().join(format!("flusig_example_{}", std::process::id()));
    let data = base.join("data");
    let out = base.join("out");
    fs::create_dir_all(&data).unwrap();

    let summary = write_fixture_set(&data, 42, 1500, 500).unwrap();
    println!(
        "fixtures: {} posts, {} training posts, {} weeks in {}",
        summary.posts, summary.train, summary.weeks, summary.dir
    );

    let overrides = Overrides {
        out: Some(out.clone()),
        ..Overrides::default()
    };
    let config = load_config(&data.join("config.toml"), &overrides).unwrap();
    let report = cmd_report(&config).unwrap();

    let c = &report.classify;
    println!(
        "\nclassify: best k {}, hold-out accuracy {:.3}, {} influenza posts",
        c.best_k, c.holdout.accuracy, c.influenza_posts
    );
    let e = &report.embed;
    println!(
        "embed: north vocab {}, south vocab {}, {} networks",
        e.north_vocab, e.south_vocab, e.networks
    );
    let a = &report.analyze;
    println!(
        "analyze: {} scored posts, {} correlation rows",
        a.scored_posts,
        a.correlations.len()
    );
    println!("\nregression suite:");
    for row in &report.regress.rows {
        println!(
            "  {:<6} {:<22} dev.expl. {:.4}",
            row.region.to_string(),
            row.spec.to_string(),
            row.deviance_explained
        );
    }

    // every artifact lands inside the output directory
    let files: Vec<PathBuf> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| e.path())
        .collect();
    println!("\n{} top-level artifacts in {}", files.len(), out.display());
    for name in ["model_suite.csv", "chi_square.csv", "correlation.csv"] {
        let body = fs::read_to_string(out.join(name)).unwrap();
        println!("\n== {name} ==");
        for line in body.lines().take(5) {
            println!("{line}");
        }
    }

    fs::remove_dir_all(&base).ok();
}
