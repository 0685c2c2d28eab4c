//! Dictionary segmentation of unspaced text by forward maximum matching.
//!
//! Builds a small lexicon, walks a handful of glued-together strings, and
//! shows how the longest-match rule resolves overlapping entries and how
//! separator handling changes the token stream.

use flusig::text::{segment, Lexicon, SegmentOptions};

fn main() {
    let lexicon = Lexicon::new([
        "influenza",
        "fever",
        "high fever",
        "cough",
        "coughing",
        "all",
        "night",
        "all night",
        "hospital",
        "went to hospital",
    ]);
    println!(
        "lexicon: {} entries, longest {} chars\n",
        lexicon.len(),
        lexicon.max_chars()
    );

    let samples = [
        // "coughing" beats "cough"; the glued text can't match the
        // spaced entry "all night", so its words match one by one
        "coughingallnight",
        // longest-match takes "high fever" over "fever" when both start here
        "high feverinfluenza",
        // unknown characters fall through as single-character tokens
        "feverXcough",
        // punctuation is dropped by default
        "went to hospital, coughing!",
    ];

    for text in samples {
        let tokens = segment(text, &lexicon, SegmentOptions::default());
        println!("{text:?}");
        println!("  -> {tokens:?}");
    }

    // with separators kept, concatenating the tokens reproduces the input
    let text = "went to hospital, coughing!";
    let kept = segment(
        text,
        &lexicon,
        SegmentOptions {
            keep_separators: true,
        },
    );
    println!("\nseparators kept: {kept:?}");
    assert_eq!(kept.concat(), text);
    println!("round-trip: concat(tokens) == input");
}
