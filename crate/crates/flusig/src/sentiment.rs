//! Dictionary-based emotion scoring: signed valence per post from base
//! strengths, degree adverbs, and negation words, plus regional and
//! seasonal intensity aggregates and emoticon-category frequencies.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{assign_season, Post, Region, Season, SeasonMap};
use crate::text::{extract_emoticons, EmoticonCategory, EmoticonTable};

/// Tokens looked back at when applying degree adverbs and negations.
const CONTEXT_WINDOW: usize = 3;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("sentiment word {word:?} has zero base strength")]
    ZeroStrength { word: String },
    #[error("degree adverb {word:?} has non-positive multiplier {value}")]
    NonPositiveMultiplier { word: String, value: f64 },
    #[error("post {id:?} has no region assigned")]
    MissingRegion { id: String },
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

/// Emotion dictionary: signed word strengths, positive degree-adverb
/// multipliers, and a negation word set.
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    strengths: HashMap<String, f64>,
    degrees: HashMap<String, f64>,
    negations: HashSet<String>,
}

impl SentimentLexicon {
    pub fn new<W, D, N>(
        words: W,
        degrees: D,
        negations: N,
    ) -> Result<SentimentLexicon, SentimentError>
    where
        W: IntoIterator<Item = (String, f64)>,
        D: IntoIterator<Item = (String, f64)>,
        N: IntoIterator<Item = String>,
    {
        let mut lexicon = SentimentLexicon::default();
        for (word, strength) in words {
            if strength == 0.0 {
                return Err(SentimentError::ZeroStrength { word });
            }
            lexicon.strengths.entry(word).or_insert(strength);
        }
        for (word, value) in degrees {
            if value <= 0.0 {
                return Err(SentimentError::NonPositiveMultiplier { word, value });
            }
            lexicon.degrees.entry(word).or_insert(value);
        }
        lexicon.negations.extend(negations);
        Ok(lexicon)
    }

    /// Loads `word<TAB>strength` and `adverb<TAB>multiplier` tables and
    /// a one-word-per-line negation list. Blank lines and `#` comments
    /// are ignored; the degree and negation files are optional.
    pub fn from_files(
        words: &Path,
        degrees: Option<&Path>,
        negations: Option<&Path>,
    ) -> Result<SentimentLexicon, SentimentError> {
        let word_entries = read_weighted(words)?;
        let degree_entries = match degrees {
            Some(path) => read_weighted(path)?,
            None => Vec::new(),
        };
        let negation_entries = match negations {
            Some(path) => read_lines(path)?,
            None => Vec::new(),
        };
        SentimentLexicon::new(word_entries, degree_entries, negation_entries)
    }

    /// Small built-in dictionary matching the synthetic corpus.
    pub fn demo() -> SentimentLexicon {
        use crate::corpus::synth;
        SentimentLexicon::new(
            synth::demo_sentiment_entries()
                .into_iter()
                .map(|(w, s)| (w.to_string(), s)),
            synth::demo_degree_entries()
                .into_iter()
                .map(|(w, m)| (w.to_string(), m)),
            synth::demo_negation_entries()
                .into_iter()
                .map(str::to_string),
        )
        .expect("demo dictionary is valid")
    }

    pub fn strength(&self, token: &str) -> Option<f64> {
        self.strengths.get(token).copied()
    }

    pub fn degree(&self, token: &str) -> Option<f64> {
        self.degrees.get(token).copied()
    }

    pub fn is_negation(&self, token: &str) -> bool {
        self.negations.contains(token)
    }

    pub fn len(&self) -> usize {
        self.strengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strengths.is_empty()
    }
}

fn read_weighted(path: &Path) -> Result<Vec<(String, f64)>, SentimentError> {
    let body = fs::read_to_string(path).map_err(|source| SentimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut entries = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| SentimentError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message,
        };
        let (word, value) = line
            .split_once('\t')
            .ok_or_else(|| err("expected word<TAB>value".to_string()))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| err(format!("bad value {value:?}")))?;
        entries.push((word.trim().to_string(), value));
    }
    Ok(entries)
}

fn read_lines(path: &Path) -> Result<Vec<String>, SentimentError> {
    let body = fs::read_to_string(path).map_err(|source| SentimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(body
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub value: f64,
    pub polarity: Polarity,
}

impl SentimentScore {
    /// Polarity is the sign of the value, always.
    pub fn from_value(value: f64) -> SentimentScore {
        let polarity = if value > 0.0 {
            Polarity::Positive
        } else if value < 0.0 {
            Polarity::Negative
        } else {
            Polarity::Neutral
        };
        SentimentScore { value, polarity }
    }
}

/// Sums, over every sentiment word in the token stream, its base
/// strength times the multiplier of the nearest preceding degree adverb
/// within the last three tokens (default 1), with the sign flipped when
/// a negation word occurs in that window. Unknown tokens contribute 0.
pub fn score_text(tokens: &[String], lexicon: &SentimentLexicon) -> SentimentScore {
    let mut value = 0.0;
    for (i, token) in tokens.iter().enumerate() {
        let Some(base) = lexicon.strength(token) else {
            continue;
        };
        let window = &tokens[i.saturating_sub(CONTEXT_WINDOW)..i];
        let multiplier = window
            .iter()
            .rev()
            .find_map(|t| lexicon.degree(t))
            .unwrap_or(1.0);
        let flip = if window.iter().any(|t| lexicon.is_negation(t)) {
            -1.0
        } else {
            1.0
        };
        value += base * multiplier * flip;
    }
    SentimentScore::from_value(value)
}

/// A post's score alongside the grouping keys used by every aggregate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredPost {
    pub id: String,
    pub region: Region,
    pub season: Season,
    pub score: SentimentScore,
}

/// Scores every post; fails if any post lacks a region.
pub fn score_posts(
    posts: &[Post],
    lexicon: &SentimentLexicon,
    seasons: &SeasonMap,
) -> Result<Vec<ScoredPost>, SentimentError> {
    posts
        .iter()
        .map(|post| {
            let region = post.region.ok_or_else(|| SentimentError::MissingRegion {
                id: post.id.clone(),
            })?;
            Ok(ScoredPost {
                id: post.id.clone(),
                region,
                season: assign_season(&post.timestamp, seasons),
                score: score_text(&post.tokens, lexicon),
            })
        })
        .collect()
}

/// Keeps scores in the closed interval [-100, 100].
pub fn filter_range(scored: Vec<ScoredPost>) -> Vec<ScoredPost> {
    scored
        .into_iter()
        .filter(|s| s.score.value.abs() <= 100.0)
        .collect()
}

/// Drops neutral (zero-valued) scores; aggregates run on this set.
pub fn exclude_neutral(scored: Vec<ScoredPost>) -> Vec<ScoredPost> {
    scored
        .into_iter()
        .filter(|s| s.score.polarity != Polarity::Neutral)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityMode {
    Absolute,
    PositiveOnly,
    NegativeOnly,
}

impl IntensityMode {
    pub const ALL: [IntensityMode; 3] = [
        IntensityMode::Absolute,
        IntensityMode::PositiveOnly,
        IntensityMode::NegativeOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IntensityMode::Absolute => "absolute",
            IntensityMode::PositiveOnly => "positive_only",
            IntensityMode::NegativeOnly => "negative_only",
        }
    }
}

impl fmt::Display for IntensityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mean emotional intensity per region and season. Absolute averages
/// |value| over the whole group; the signed modes average only the
/// matching-sign scores. Groups with no qualifying score are absent.
pub fn mean_intensity(
    scored: &[ScoredPost],
    mode: IntensityMode,
) -> BTreeMap<(Region, Season), f64> {
    let mut sums: BTreeMap<(Region, Season), (f64, usize)> = BTreeMap::new();
    for post in scored {
        let value = match mode {
            IntensityMode::Absolute => Some(post.score.value.abs()),
            IntensityMode::PositiveOnly => (post.score.value > 0.0).then_some(post.score.value),
            IntensityMode::NegativeOnly => (post.score.value < 0.0).then_some(post.score.value),
        };
        if let Some(value) = value {
            let cell = sums.entry((post.region, post.season)).or_insert((0.0, 0));
            cell.0 += value;
            cell.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(key, (sum, n))| (key, sum / n as f64))
        .collect()
}

/// Mean occurrences per post for every region and emoticon category,
/// and per-category north/south rates (absent when the south frequency
/// is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct EmoticonReport {
    pub frequency: BTreeMap<(Region, EmoticonCategory), f64>,
    pub rate: BTreeMap<EmoticonCategory, f64>,
}

pub fn emoticon_frequency(
    posts: &[Post],
    table: &EmoticonTable,
) -> Result<EmoticonReport, SentimentError> {
    let mut totals: BTreeMap<(Region, EmoticonCategory), u64> = BTreeMap::new();
    let mut post_counts: BTreeMap<Region, u64> = BTreeMap::new();
    for post in posts {
        let region = post.region.ok_or_else(|| SentimentError::MissingRegion {
            id: post.id.clone(),
        })?;
        *post_counts.entry(region).or_insert(0) += 1;
        let counts = extract_emoticons(&post.text, table);
        for category in EmoticonCategory::ALL {
            *totals.entry((region, category)).or_insert(0) += u64::from(counts.get(category));
        }
    }

    let mut frequency = BTreeMap::new();
    for (&region, &n_posts) in &post_counts {
        for category in EmoticonCategory::ALL {
            let total = totals.get(&(region, category)).copied().unwrap_or(0);
            frequency.insert((region, category), total as f64 / n_posts as f64);
        }
    }
    let mut rate = BTreeMap::new();
    for category in EmoticonCategory::ALL {
        let north = frequency.get(&(Region::North, category)).copied();
        let south = frequency.get(&(Region::South, category)).copied();
        if let (Some(north), Some(south)) = (north, south) {
            if south != 0.0 {
                rate.insert(category, north / south);
            }
        }
    }
    Ok(EmoticonReport { frequency, rate })
}

/// Intensity aggregates over all three modes, in deterministic order.
#[derive(Debug, Clone, Serialize)]
pub struct IntensityRow {
    pub region: Region,
    pub season: Season,
    pub mode: IntensityMode,
    pub value: f64,
}

pub fn intensity_rows(scored: &[ScoredPost]) -> Vec<IntensityRow> {
    let mut rows = Vec::new();
    for mode in IntensityMode::ALL {
        for ((region, season), value) in mean_intensity(scored, mode) {
            rows.push(IntensityRow {
                region,
                season,
                mode,
                value,
            });
        }
    }
    rows
}

/// CSV export `region,season,mode,value`.
pub fn write_intensity_csv(rows: &[IntensityRow], path: &Path) -> Result<(), SentimentError> {
    let mut out = String::from("region,season,mode,value\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.region, row.season, row.mode, row.value
        ));
    }
    fs::write(path, out).map_err(|source| SentimentError::Io {
        path: path.display().to_string(),
        source,
    })
}
