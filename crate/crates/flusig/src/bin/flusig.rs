//! Command-line front end: config-driven surveillance pipeline runs
//! plus a synthetic-dataset generator for demos and tests.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flusig::analytics::CarryMode;
use flusig::pipeline::{
    self, AnalyzeOutcome, ClassifyOutcome, EmbedOutcome, Overrides, PipelineConfig, PipelineError,
    RegressOutcome,
};

#[derive(Parser)]
#[command(
    name = "flusig",
    version,
    about = "Regional influenza surveillance signals from social-media text"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the post classifier and label the corpus
    Classify(RunArgs),
    /// Train per-region word embeddings and export similarity networks
    Embed(RunArgs),
    /// Compute incentives, sentiment, emoticon, and correlation reports
    Analyze(RunArgs),
    /// Fit the weekly regression model suite
    Regress(RunArgs),
    /// Run classify, embed, analyze, and regress in order
    Report(RunArgs),
    /// Write a synthetic demo dataset with a ready-to-run config
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline configuration file
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Seed override
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Output directory override
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override how prolonged counts carry into the following week
    #[arg(long, value_name = "MODE", value_parser = parse_carry_mode)]
    carry_mode: Option<CarryMode>,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory to write the dataset into
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Generator seed
    #[arg(long, value_name = "INT", default_value_t = 42)]
    seed: u64,
    /// Unlabeled corpus size
    #[arg(long, value_name = "N", default_value_t = 2500)]
    posts: usize,
    /// Labeled training corpus size
    #[arg(long, value_name = "N", default_value_t = 800)]
    train: usize,
}

fn parse_carry_mode(s: &str) -> Result<CarryMode, String> {
    CarryMode::parse(s).ok_or_else(|| format!("expected add or move, got {s:?}"))
}

fn load(args: &RunArgs) -> Result<PipelineConfig, PipelineError> {
    pipeline::load_config(
        &args.config,
        &Overrides {
            seed: args.seed,
            out: args.out.clone(),
            carry_mode: args.carry_mode,
        },
    )
}

fn opt_ratio(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.3}"),
        None => "n/a".to_string(),
    }
}

fn print_classify(outcome: &ClassifyOutcome) {
    println!(
        "classify: best k {} ({} features), hold-out accuracy {:.3} precision {} recall {}",
        outcome.best_k,
        outcome.selected_dim,
        outcome.holdout.accuracy,
        opt_ratio(outcome.holdout.precision),
        opt_ratio(outcome.holdout.recall),
    );
    println!(
        "classify: labeled {} posts ({} influenza), {} input lines skipped",
        outcome.corpus_posts,
        outcome.influenza_posts,
        outcome.corpus_skipped + outcome.train_skipped,
    );
}

fn print_embed(outcome: &EmbedOutcome) {
    println!(
        "embed: north {} posts / {} words, south {} posts / {} words, {} networks",
        outcome.north_posts,
        outcome.north_vocab,
        outcome.south_posts,
        outcome.south_vocab,
        outcome.networks,
    );
    if !outcome.missing_seeds.is_empty() {
        println!("embed: missing seeds: {}", outcome.missing_seeds.join(", "));
    }
}

fn print_analyze(outcome: &AnalyzeOutcome) {
    match &outcome.chi_square {
        Some(chi) => println!(
            "analyze: {} influenza posts; polarity chi-square {:.2} (dof {}, p {:.4})",
            outcome.influenza_posts, chi.statistic, chi.dof, chi.p_value,
        ),
        None => println!(
            "analyze: {} influenza posts; polarity test skipped",
            outcome.influenza_posts,
        ),
    }
    println!(
        "analyze: {} incentive cells, {} intensity cells, {} correlations",
        outcome.incentive_cells,
        outcome.intensity_cells,
        outcome.correlations.len(),
    );
}

fn print_regress(outcome: &RegressOutcome) {
    println!(
        "{:<6} {:<20} {:>10} {:>8} {:>10} {:>6}",
        "region", "model", "dev.expl.", "rmse", "aic", "edf"
    );
    for row in &outcome.rows {
        println!(
            "{:<6} {:<20} {:>10.4} {:>8.4} {:>10.2} {:>6.2}",
            row.region.to_string(),
            row.spec.to_string(),
            row.deviance_explained,
            row.rmse,
            row.aic,
            row.edf,
        );
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Classify(args) => print_classify(&pipeline::cmd_classify(&load(&args)?)?),
        Command::Embed(args) => print_embed(&pipeline::cmd_embed(&load(&args)?)?),
        Command::Analyze(args) => print_analyze(&pipeline::cmd_analyze(&load(&args)?)?),
        Command::Regress(args) => print_regress(&pipeline::cmd_regress(&load(&args)?)?),
        Command::Report(args) => {
            let outcome = pipeline::cmd_report(&load(&args)?)?;
            print_classify(&outcome.classify);
            print_embed(&outcome.embed);
            print_analyze(&outcome.analyze);
            print_regress(&outcome.regress);
        }
        Command::Synth(args) => {
            let summary =
                pipeline::write_fixture_set(&args.out, args.seed, args.posts, args.train)?;
            println!(
                "synth: wrote {} posts, {} training posts, {} weeks to {}",
                summary.posts, summary.train, summary.weeks, summary.dir,
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
