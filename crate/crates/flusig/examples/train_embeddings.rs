//! Regional word embeddings and seed-word neighbor networks.
//!
//! Trains one skip-gram model per region on the influenza slice of a
//! synthetic corpus, then partitions each seed word's top neighbors into
//! region-exclusive and shared edges.

use std::collections::BTreeSet;

use flusig::corpus::synth::{synth_corpus, SynthSpec};
use flusig::corpus::{Label, Region};
use flusig::embeddings::{build_word_network, cosine, most_similar, train_sgns, SgnsParams};

fn main() {
    let spec = SynthSpec {
        n_posts: 1200,
        ..SynthSpec::default()
    };
    let posts = synth_corpus(&spec, 21);

    let sentences = |region: Region| -> Vec<Vec<String>> {
        posts
            .iter()
            .filter(|p| p.label == Label::Influenza && p.region == Some(region))
            .map(|p| p.tokens.clone())
            .collect()
    };
    let north_sents = sentences(Region::North);
    let south_sents = sentences(Region::South);
    println!(
        "influenza posts: north {}, south {}",
        north_sents.len(),
        south_sents.len()
    );

    let params = SgnsParams {
        dim: 32,
        window: 3,
        negatives: 4,
        epochs: 5,
        min_count: 2,
        learning_rate: 0.025,
    };
    let north = train_sgns(&north_sents, &params, 1).unwrap();
    let south = train_sgns(&south_sents, &params, 2).unwrap();
    println!(
        "vocab: north {} words, south {} words",
        north.vocab().len(),
        south.vocab().len()
    );

    // nearest neighbors of one seed in each regional space
    for (name, model) in [("north", &north), ("south", &south)] {
        let neighbors = most_similar(model, "fever", 5).unwrap();
        println!("\n{name} neighbors of \"fever\":");
        for (token, cos) in neighbors {
            println!("  {token:<12} {cos:.3}");
        }
    }

    // the same word in the two spaces is not comparable coordinate-wise;
    // cosine within a space is the meaningful quantity
    let a = north.vector("fever").unwrap();
    let b = north.vector("cough").unwrap();
    println!("\nnorth cosine(fever, cough) = {:.3}", cosine(a, b));

    let seeds = vec!["fever".to_string(), "cough".to_string()];
    let set = build_word_network(&seeds, &north, &south, 10, &BTreeSet::new());
    for network in &set.networks {
        println!("\nnetwork for \"{}\":", network.seed);
        for edge in network.edges.iter().take(8) {
            println!(
                "  {:<12} {:<10} {:.3}",
                edge.neighbor, edge.annotation, edge.cosine
            );
        }
    }
    if !set.missing_seeds.is_empty() {
        println!("seeds missing from a vocabulary: {:?}", set.missing_seeds);
    }
}
