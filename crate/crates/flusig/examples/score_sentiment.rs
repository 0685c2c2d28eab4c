//! Dictionary sentiment scoring with degree adverbs and negation.
//!
//! Scores single token streams to show the context rules, then scores a
//! synthetic corpus and aggregates mean emotional intensity per region
//! and season.

use flusig::corpus::synth::{synth_corpus, SynthSpec};
use flusig::corpus::{Label, SeasonMap};
use flusig::sentiment::{
    exclude_neutral, mean_intensity, score_posts, score_text, IntensityMode, SentimentLexicon,
};

fn toks(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

fn main() {
    let lexicon = SentimentLexicon::new(
        [("happy".to_string(), 5.0), ("miserable".to_string(), -5.0)],
        [("very".to_string(), 2.0), ("slightly".to_string(), 0.5)],
        ["not".to_string()],
    )
    .unwrap();

    // a degree adverb scales the next sentiment word, negation flips it
    for words in [
        vec!["happy"],
        vec!["very", "happy"],
        vec!["slightly", "miserable"],
        vec!["not", "happy"],
        vec!["not", "very", "happy"],
        vec!["fever", "cough"],
    ] {
        let score = score_text(&toks(&words), &lexicon);
        println!(
            "{:<22} value {:>6.1}  polarity {}",
            words.join(" "),
            score.value,
            score.polarity
        );
    }

    // corpus-level aggregation under the built-in demo dictionary
    let spec = SynthSpec {
        n_posts: 800,
        ..SynthSpec::default()
    };
    let posts = synth_corpus(&spec, 5);
    let flu: Vec<_> = posts
        .into_iter()
        .filter(|p| p.label == Label::Influenza)
        .collect();
    let scored = score_posts(&flu, &SentimentLexicon::demo(), &SeasonMap::default()).unwrap();
    println!("\nscored {} influenza posts", scored.len());

    let scored = exclude_neutral(scored);
    println!("{} posts remain after dropping neutrals", scored.len());

    for mode in IntensityMode::ALL {
        println!("\nmean intensity ({mode}):");
        for ((region, season), value) in mean_intensity(&scored, mode) {
            println!("  {region:<6} {season:<7} {value:>7.2}");
        }
    }
}
