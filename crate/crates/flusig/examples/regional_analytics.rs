//! Regional contrasts: chi-square, incentive ratios, correlation, and
//! carry-forward adjustment of a weekly case series.
//!
//! Every statistic here runs on synthetic data with a known construction,
//! so the printed numbers can be sanity-checked by eye.

use flusig::analytics::{
    adjust_irt, chi_square, incentive_ratio, pearson, pirt_ratio, CarryMode, ContingencyTable,
    KeywordSet,
};
use flusig::corpus::synth::{synth_corpus, synth_weekly, SeriesSpec, SynthSpec};
use flusig::corpus::{Label, SeasonMap};

fn main() {
    // polarity-by-region counts laid out as a 2x3 table
    let table = ContingencyTable::new(
        vec!["north", "south"],
        vec!["positive", "negative", "neutral"],
        vec![
            vec![87_264, 374_173, 51_399],
            vec![221_142, 939_864, 138_035],
        ],
    )
    .unwrap();
    let result = chi_square(&table).unwrap();
    println!(
        "chi-square {:.2} (dof {}, p {:.2e})",
        result.statistic, result.dof, result.p_value
    );
    println!("expected counts under independence:");
    for (label, row) in table.row_labels.iter().zip(&result.expected) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.2}")).collect();
        println!("  {label:<6} {}", cells.join(" "));
    }

    // treatment-seeking share per region and season
    let posts = synth_corpus(
        &SynthSpec {
            n_posts: 1500,
            ..SynthSpec::default()
        },
        13,
    );
    let flu: Vec<_> = posts
        .into_iter()
        .filter(|p| p.label == Label::Influenza)
        .collect();
    let ratios =
        incentive_ratio(&flu, &KeywordSet::hospital_demo(), &SeasonMap::default()).unwrap();
    println!("\ntreatment-seeking share by region and season:");
    for ((region, season), share) in &ratios {
        println!("  {region:<6} {season:<7} {share:.3}");
    }

    // a weekly series with planted prolonged-case structure
    let series = synth_weekly(&SeriesSpec::default(), 31);
    let ratio = pirt_ratio(&series);
    let peak = ratio
        .iter()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    println!(
        "\nprolonged-case share: {} weeks, peak {:.2} in {}",
        ratio.len(),
        peak.1,
        peak.0
    );

    // carry the prolonged slice one week forward, both bookkeeping modes
    let added = adjust_irt(&series, CarryMode::Add);
    let moved = adjust_irt(&series, CarryMode::Move);
    let sum = |v: &[u32]| v.iter().map(|&x| u64::from(x)).sum::<u64>();
    println!(
        "raw total {}, add-mode total {}, move-mode total {}",
        sum(&series.irt),
        sum(added.adjusted_irt.as_ref().unwrap()),
        sum(moved.adjusted_irt.as_ref().unwrap()),
    );

    // the adjusted signal should track incidence more closely
    let counts: Vec<f64> = series.irt.iter().map(|&v| f64::from(v)).collect();
    let adjusted: Vec<f64> = added
        .adjusted_irt
        .as_ref()
        .unwrap()
        .iter()
        .map(|&v| f64::from(v))
        .collect();
    let raw = pearson(&counts, &series.ili).unwrap();
    let adj = pearson(&adjusted, &series.ili).unwrap();
    println!(
        "correlation with incidence: raw r {:.3} (p {:.1e}), adjusted r {:.3} (p {:.1e})",
        raw.r, raw.p_value, adj.r, adj.p_value
    );
}
