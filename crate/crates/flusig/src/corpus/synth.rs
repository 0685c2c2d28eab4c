//! Deterministic synthetic corpora and weekly series with planted structure.
//!
//! The generator plants every signal the downstream stages look for: two
//! separable topic vocabularies for the classifier, co-occurring token
//! pairs for the embeddings, signed sentiment words and emoticons with a
//! regional skew, treatment and duration phrases at week-varying rates,
//! and an ILI response driven by the carried-forward weekly signal. All
//! randomness flows from one seeded stream, so equal seeds give equal
//! corpora byte for byte.

use chrono::FixedOffset;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use super::{Label, Post, Region, Week, WeeklySeries};
use crate::text::EmoticonCategory;

/// A token pair inserted adjacently into influenza posts, optionally in
/// one region only.
#[derive(Debug, Clone)]
pub struct PlantedPair {
    pub first: String,
    pub second: String,
    /// Probability an eligible post carries the pair.
    pub rate: f64,
    /// `None` plants in both regions.
    pub region: Option<Region>,
}

/// Phrase planting with per-region base rates and a sinusoidal weekly
/// modulation (amplitude as a fraction of the base rate).
#[derive(Debug, Clone)]
pub struct PhrasePlanting {
    pub phrases: Vec<String>,
    pub north_rate: f64,
    pub south_rate: f64,
    pub seasonal_amplitude: f64,
}

impl PhrasePlanting {
    fn rate(&self, region: Region, week_idx: usize) -> f64 {
        let base = match region {
            Region::North => self.north_rate,
            Region::South => self.south_rate,
        };
        let phase = week_idx as f64 * std::f64::consts::TAU / 16.0;
        (base * (1.0 + self.seasonal_amplitude * phase.sin())).clamp(0.0, 0.95)
    }
}

/// Signed sentiment token sequences with per-region rates.
#[derive(Debug, Clone)]
pub struct SentimentPlanting {
    pub positive_units: Vec<Vec<String>>,
    pub negative_units: Vec<Vec<String>>,
    pub north_positive: f64,
    pub north_negative: f64,
    pub south_positive: f64,
    pub south_negative: f64,
}

/// Bracketed emoticon literals per category with per-region rates. The
/// category mix is skewed negative in the north and positive in the south.
#[derive(Debug, Clone)]
pub struct EmoticonPlanting {
    pub joy: Vec<String>,
    pub happiness: Vec<String>,
    pub sadness: Vec<String>,
    pub anger: Vec<String>,
    pub north_rate: f64,
    pub south_rate: f64,
}

/// Generator parameters for a synthetic post corpus.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n_posts: usize,
    pub positive_fraction: f64,
    pub north_fraction: f64,
    /// Inclusive bounds on the number of background tokens per post.
    pub tokens_per_post: (usize, usize),
    /// Probability a background token comes from the class topic rather
    /// than the shared vocabulary.
    pub topic_purity: f64,
    pub flu_tokens: Vec<String>,
    pub noise_tokens: Vec<String>,
    pub shared_tokens: Vec<String>,
    pub planted_pairs: Vec<PlantedPair>,
    pub sentiment: SentimentPlanting,
    pub duration: PhrasePlanting,
    pub hospital: PhrasePlanting,
    pub emoticons: EmoticonPlanting,
    pub north_provinces: Vec<String>,
    pub south_provinces: Vec<String>,
    pub start_week: Week,
    /// Relative post volume per week; its length fixes the study window.
    pub weekly_weights: Vec<f64>,
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// The 22 treatment-related phrases shipped as the demo hospital keyword set.
pub fn hospital_phrases() -> Vec<String> {
    strings(&[
        "hospital",
        "outpatient service",
        "emergency treatment",
        "draw blood",
        "blood test",
        "register",
        "test",
        "transfusion",
        "prescribe",
        "chest x-ray",
        "doctor",
        "in hospital",
        "take an injection",
        "pick up the medicine",
        "return visit examination",
        "emergency clinic",
        "queue",
        "make a definite diagnosis",
        "urine test",
        "in treatment",
        "pneumonia",
        "pay the fees",
    ])
}

/// The 14 long-duration phrases shipped as the demo duration keyword set.
pub fn duration_phrases() -> Vec<String> {
    strings(&[
        "over ten days",
        "two weeks",
        "three weeks",
        "half a month",
        "over twenty days",
        "many days",
        "several weeks",
        "a month and a half",
        "one month",
        "more than one month",
        "two months",
        "several months",
        "a month or so",
        "a long time",
    ])
}

/// Demo sentiment lexicon: word and signed base strength.
pub fn demo_sentiment_entries() -> Vec<(&'static str, f64)> {
    vec![
        ("happy", 5.0),
        ("glad", 4.0),
        ("relieved", 3.0),
        ("awful", -5.0),
        ("terrible", -6.0),
        ("worried", -3.0),
        ("tired", -2.0),
        ("sad", -4.0),
        ("miserable", -5.0),
    ]
}

/// Demo degree adverbs: word and multiplier.
pub fn demo_degree_entries() -> Vec<(&'static str, f64)> {
    vec![("very", 2.0), ("extremely", 3.0), ("slightly", 0.5)]
}

pub fn demo_negation_entries() -> Vec<&'static str> {
    vec!["not", "never", "hardly"]
}

pub fn demo_emoticon_entries() -> Vec<(&'static str, EmoticonCategory)> {
    vec![
        ("[laugh]", EmoticonCategory::Joy),
        ("[yeah]", EmoticonCategory::Joy),
        ("[haha]", EmoticonCategory::Happiness),
        ("[love]", EmoticonCategory::Happiness),
        ("[sad]", EmoticonCategory::Sadness),
        ("[tear]", EmoticonCategory::Sadness),
        ("[angry]", EmoticonCategory::Anger),
        ("[fume]", EmoticonCategory::Anger),
    ]
}

/// Demo province split. The sentinel network's own assignment is not
/// public; this convention follows the customary north/south grouping of
/// mainland provinces and is fully editable via the region map file.
pub fn default_region_map() -> Vec<(&'static str, Region)> {
    use Region::*;
    vec![
        ("Beijing", North),
        ("Tianjin", North),
        ("Hebei", North),
        ("Shanxi", North),
        ("NeiMenggu", North),
        ("Liaoning", North),
        ("Jilin", North),
        ("Heilongjiang", North),
        ("Shandong", North),
        ("Henan", North),
        ("Shaanxi", North),
        ("Gansu", North),
        ("Qinghai", North),
        ("Ningxia", North),
        ("Xinjiang", North),
        ("Shanghai", South),
        ("Jiangsu", South),
        ("Zhejiang", South),
        ("Anhui", South),
        ("Fujian", South),
        ("Jiangxi", South),
        ("Hubei", South),
        ("Hunan", South),
        ("Guangdong", South),
        ("Guangxi", South),
        ("Hainan", South),
        ("Chongqing", South),
        ("Sichuan", South),
        ("Guizhou", South),
        ("Yunnan", South),
        ("Xizang", South),
    ]
}

/// Query keywords the corpus was filtered by; also the default seeds for
/// the word-network stage.
pub fn seed_tokens() -> Vec<String> {
    strings(&["influenza", "cold", "cough", "fever", "sneeze", "rhinobyon"])
}

fn bimodal_weights(n: usize) -> Vec<f64> {
    let g = |i: f64, c: f64, s: f64| (-((i - c) * (i - c)) / (2.0 * s * s)).exp();
    (0..n)
        .map(|i| {
            let i = i as f64;
            1.0 + 2.5 * g(i, 6.0, 4.0) + 3.0 * g(i, (n as f64) - 5.0, 5.0)
        })
        .collect()
}

impl Default for SynthSpec {
    fn default() -> Self {
        let provinces = default_region_map();
        SynthSpec {
            n_posts: 2000,
            positive_fraction: 0.5,
            north_fraction: 0.5,
            tokens_per_post: (8, 16),
            topic_purity: 0.8,
            flu_tokens: {
                let mut t = seed_tokens();
                t.extend(strings(&[
                    "fashao", "kesou", "ganmao", "toutong", "bisai", "liubiti", "fali", "hanzhan",
                ]));
                t
            },
            noise_tokens: strings(&[
                "movie",
                "music",
                "basketball",
                "travel",
                "stock",
                "weather",
                "dinner",
                "game",
                "holiday",
                "dianying",
                "yinyue",
                "lanqiu",
                "gupiao",
                "mingxing",
            ]),
            shared_tokens: strings(&[
                "today", "really", "feel", "maybe", "morning", "night", "jintian", "zhende",
                "juede", "home",
            ]),
            planted_pairs: vec![
                PlantedPair {
                    first: "fever".to_string(),
                    second: "nuanqi".to_string(),
                    rate: 0.35,
                    region: Some(Region::North),
                },
                PlantedPair {
                    first: "fever".to_string(),
                    second: "huoguo".to_string(),
                    rate: 0.35,
                    region: Some(Region::South),
                },
                PlantedPair {
                    first: "cough".to_string(),
                    second: "jiangtang".to_string(),
                    rate: 0.3,
                    region: None,
                },
            ],
            sentiment: SentimentPlanting {
                positive_units: vec![
                    vec!["happy".to_string()],
                    vec!["very".to_string(), "happy".to_string()],
                    vec!["glad".to_string()],
                    vec!["extremely".to_string(), "glad".to_string()],
                    vec!["relieved".to_string()],
                ],
                negative_units: vec![
                    vec!["awful".to_string()],
                    vec!["very".to_string(), "tired".to_string()],
                    vec!["terrible".to_string()],
                    vec!["worried".to_string()],
                    vec!["not".to_string(), "happy".to_string()],
                    vec!["extremely".to_string(), "sad".to_string()],
                    vec!["miserable".to_string()],
                ],
                north_positive: 0.22,
                north_negative: 0.50,
                south_positive: 0.50,
                south_negative: 0.22,
            },
            duration: PhrasePlanting {
                phrases: duration_phrases(),
                north_rate: 0.12,
                south_rate: 0.40,
                seasonal_amplitude: 0.8,
            },
            hospital: PhrasePlanting {
                phrases: hospital_phrases(),
                north_rate: 0.12,
                south_rate: 0.07,
                seasonal_amplitude: 0.3,
            },
            emoticons: EmoticonPlanting {
                joy: vec!["[laugh]".to_string(), "[yeah]".to_string()],
                happiness: vec!["[haha]".to_string(), "[love]".to_string()],
                sadness: vec!["[sad]".to_string(), "[tear]".to_string()],
                anger: vec!["[angry]".to_string(), "[fume]".to_string()],
                north_rate: 0.55,
                south_rate: 0.30,
            },
            north_provinces: provinces
                .iter()
                .filter(|(_, r)| *r == Region::North)
                .map(|(p, _)| p.to_string())
                .collect(),
            south_provinces: provinces
                .iter()
                .filter(|(_, r)| *r == Region::South)
                .map(|(p, _)| p.to_string())
                .collect(),
            start_week: Week::new(2016, 4).expect("2016 has week 4"),
            weekly_weights: bimodal_weights(49),
        }
    }
}

impl SynthSpec {
    pub fn n_weeks(&self) -> usize {
        self.weekly_weights.len()
    }

    pub fn weeks(&self) -> Vec<Week> {
        let mut out = Vec::with_capacity(self.n_weeks());
        let mut w = self.start_week;
        for _ in 0..self.n_weeks() {
            out.push(w);
            w = w.next();
        }
        out
    }

    /// Every string the generator can emit as a single token, for building
    /// the matching segmentation lexicon. Multiword phrases are entries of
    /// their own so segmentation returns them whole.
    pub fn lexicon_entries(&self) -> Vec<String> {
        let mut set = std::collections::BTreeSet::new();
        for t in self
            .flu_tokens
            .iter()
            .chain(&self.noise_tokens)
            .chain(&self.shared_tokens)
        {
            set.insert(t.clone());
        }
        for p in &self.planted_pairs {
            set.insert(p.first.clone());
            set.insert(p.second.clone());
        }
        for unit in self
            .sentiment
            .positive_units
            .iter()
            .chain(&self.sentiment.negative_units)
        {
            for t in unit {
                set.insert(t.clone());
            }
        }
        for p in self.duration.phrases.iter().chain(&self.hospital.phrases) {
            set.insert(p.clone());
        }
        for lit in self
            .emoticons
            .joy
            .iter()
            .chain(&self.emoticons.happiness)
            .chain(&self.emoticons.sadness)
            .chain(&self.emoticons.anger)
        {
            set.insert(lit.clone());
        }
        for (w, _) in demo_sentiment_entries() {
            set.insert(w.to_string());
        }
        for (w, _) in demo_degree_entries() {
            set.insert(w.to_string());
        }
        for w in demo_negation_entries() {
            set.insert(w.to_string());
        }
        set.into_iter().collect()
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &'a [String]) -> &'a str {
    &items[rng.random_range(0..items.len())]
}

fn pick_weighted(rng: &mut ChaCha8Rng, cumulative: &[f64]) -> usize {
    let total = *cumulative.last().expect("non-empty weights");
    let x = rng.random_range(0.0..total);
    cumulative.partition_point(|&c| c <= x)
}

/// Generates a corpus with ground-truth labels already set on the posts.
pub fn synth_corpus(spec: &SynthSpec, seed: u64) -> Vec<Post> {
    assert!(
        !spec.weekly_weights.is_empty() || spec.n_posts == 0,
        "weekly weights must be non-empty when posts are requested"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = FixedOffset::east_opt(8 * 3600).expect("valid offset");
    let weeks = spec.weeks();
    let cumulative: Vec<f64> = spec
        .weekly_weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();

    let cat_mix_north = [0.15, 0.15, 0.40, 0.30];
    let cat_mix_south = [0.40, 0.30, 0.20, 0.10];

    let mut posts = Vec::with_capacity(spec.n_posts);
    for i in 0..spec.n_posts {
        let region = if rng.random_bool(spec.north_fraction) {
            Region::North
        } else {
            Region::South
        };
        let label = if rng.random_bool(spec.positive_fraction) {
            Label::Influenza
        } else {
            Label::Noise
        };
        let provinces = match region {
            Region::North => &spec.north_provinces,
            Region::South => &spec.south_provinces,
        };
        let province = pick(&mut rng, provinces).to_string();

        let week_idx = pick_weighted(&mut rng, &cumulative);
        let week = weeks[week_idx];
        let day = rng.random_range(0..7u64);
        let hour = rng.random_range(0..24u32);
        let minute = rng.random_range(0..60u32);
        let date = week.monday() + chrono::Days::new(day);
        let timestamp = date
            .and_hms_opt(hour, minute, 0)
            .expect("valid time")
            .and_local_timezone(offset)
            .unwrap();

        let mut units: Vec<String> = Vec::new();
        let n_tokens = rng.random_range(spec.tokens_per_post.0..=spec.tokens_per_post.1);
        let topic = match label {
            Label::Influenza => &spec.flu_tokens,
            _ => &spec.noise_tokens,
        };
        for _ in 0..n_tokens {
            let from_topic = rng.random_bool(spec.topic_purity);
            let pool = if from_topic {
                topic
            } else {
                &spec.shared_tokens
            };
            units.push(pick(&mut rng, pool).to_string());
        }

        if label == Label::Influenza {
            let (pos_rate, neg_rate) = match region {
                Region::North => (spec.sentiment.north_positive, spec.sentiment.north_negative),
                Region::South => (spec.sentiment.south_positive, spec.sentiment.south_negative),
            };
            if !spec.sentiment.positive_units.is_empty() && rng.random_bool(pos_rate) {
                let unit = &spec.sentiment.positive_units
                    [rng.random_range(0..spec.sentiment.positive_units.len())];
                let at = rng.random_range(0..=units.len());
                for (j, t) in unit.iter().enumerate() {
                    units.insert(at + j, t.clone());
                }
            }
            if !spec.sentiment.negative_units.is_empty() && rng.random_bool(neg_rate) {
                let unit = &spec.sentiment.negative_units
                    [rng.random_range(0..spec.sentiment.negative_units.len())];
                let at = rng.random_range(0..=units.len());
                for (j, t) in unit.iter().enumerate() {
                    units.insert(at + j, t.clone());
                }
            }

            if !spec.duration.phrases.is_empty()
                && rng.random_bool(spec.duration.rate(region, week_idx))
            {
                let at = rng.random_range(0..=units.len());
                units.insert(at, pick(&mut rng, &spec.duration.phrases).to_string());
            }
            if !spec.hospital.phrases.is_empty()
                && rng.random_bool(spec.hospital.rate(region, week_idx))
            {
                let at = rng.random_range(0..=units.len());
                units.insert(at, pick(&mut rng, &spec.hospital.phrases).to_string());
            }

            let emo_rate = match region {
                Region::North => spec.emoticons.north_rate,
                Region::South => spec.emoticons.south_rate,
            };
            if rng.random_bool(emo_rate) {
                let mix = match region {
                    Region::North => &cat_mix_north,
                    Region::South => &cat_mix_south,
                };
                let x: f64 = rng.random_range(0.0..1.0);
                let mut acc = 0.0;
                let mut cat = 3;
                for (c, w) in mix.iter().enumerate() {
                    acc += w;
                    if x < acc {
                        cat = c;
                        break;
                    }
                }
                let pool = match cat {
                    0 => &spec.emoticons.joy,
                    1 => &spec.emoticons.happiness,
                    2 => &spec.emoticons.sadness,
                    _ => &spec.emoticons.anger,
                };
                if !pool.is_empty() {
                    units.push(pick(&mut rng, pool).to_string());
                }
            }

            // planted last so later insertions cannot split the pair
            for pair in &spec.planted_pairs {
                if pair.region.is_some_and(|r| r != region) {
                    continue;
                }
                if rng.random_bool(pair.rate) {
                    let at = rng.random_range(0..=units.len());
                    units.insert(at, pair.second.clone());
                    units.insert(at, pair.first.clone());
                }
            }
        }

        posts.push(Post {
            id: format!("s{i:06}"),
            timestamp,
            province,
            region: Some(region),
            text: units.concat(),
            tokens: units,
            label,
        });
    }
    posts
}

/// Parameters of the synthetic ILI response.
#[derive(Debug, Clone)]
pub struct IliParams {
    /// Log-scale intercept of the weekly case count.
    pub beta0: f64,
    /// Effect of the standardized weekly signal.
    pub beta1: f64,
    /// Negative-binomial dispersion of the weekly draw.
    pub kappa: f64,
    /// Case counts per ILI percentage point.
    pub scale: f64,
    /// Drive the response with `irt[w] + pirt[w-1]` instead of plain irt.
    pub carry: bool,
}

impl Default for IliParams {
    fn default() -> Self {
        IliParams {
            beta0: 5.0,
            beta1: 0.8,
            kappa: 80.0,
            scale: 100.0,
            carry: true,
        }
    }
}

/// Draws a weekly ILI-percent series whose mean tracks the (optionally
/// carried-forward) tweet signal. Values are strictly positive.
pub fn synth_ili(irt: &[u32], pirt: &[u32], params: &IliParams, seed: u64) -> Vec<f64> {
    assert_eq!(irt.len(), pirt.len(), "irt and pirt must align");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = irt.len();
    let signal: Vec<f64> = (0..n)
        .map(|w| {
            let carry = if params.carry && w > 0 {
                pirt[w - 1] as f64
            } else {
                0.0
            };
            irt[w] as f64 + carry
        })
        .collect();
    let mean = signal.iter().sum::<f64>() / n.max(1) as f64;
    let var = signal.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n.max(1) as f64;
    let sd = var.sqrt().max(1e-12);

    signal
        .iter()
        .map(|&s| {
            let z = (s - mean) / sd;
            let mu = (params.beta0 + params.beta1 * z).exp();
            let gamma = Gamma::new(params.kappa, mu / params.kappa).expect("valid gamma");
            let lambda: f64 = gamma.sample(&mut rng).max(1e-9);
            let poisson = Poisson::new(lambda).expect("positive lambda");
            let y: f64 = poisson.sample(&mut rng);
            y.max(1.0) / params.scale
        })
        .collect()
}

/// Parameters for a direct weekly-series draw (no post corpus involved).
/// The prolonged share oscillates across weeks, so a model that sees only
/// the raw weekly volume cannot reconstruct the carried-forward signal.
#[derive(Debug, Clone)]
pub struct SeriesSpec {
    pub region: Region,
    pub start_week: Week,
    pub n_weeks: usize,
    /// Average weekly signal volume.
    pub base_irt: f64,
    /// Bounds of the oscillating prolonged share.
    pub pirt_low: f64,
    pub pirt_high: f64,
    pub ili: IliParams,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        SeriesSpec {
            region: Region::South,
            start_week: Week::new(2016, 4).expect("2016 has week 4"),
            n_weeks: 49,
            base_irt: 400.0,
            pirt_low: 0.1,
            pirt_high: 0.7,
            ili: IliParams::default(),
        }
    }
}

/// Draws a complete weekly series with planted carry-forward mechanism.
pub fn synth_weekly(spec: &SeriesSpec, seed: u64) -> WeeklySeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_weeks;
    let mut weeks = Vec::with_capacity(n);
    let mut w = spec.start_week;
    for _ in 0..n {
        weeks.push(w);
        w = w.next();
    }

    let mut irt = Vec::with_capacity(n);
    let mut pirt = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64;
        let seasonal = 1.0 + 0.6 * (std::f64::consts::TAU * t / n as f64).sin();
        let jitter: f64 = rng.random_range(0.85..1.15);
        let volume = (spec.base_irt * seasonal * jitter).round().max(1.0) as u32;
        let share_phase = std::f64::consts::TAU * t / 17.0;
        let share =
            spec.pirt_low + (spec.pirt_high - spec.pirt_low) * 0.5 * (1.0 + share_phase.sin());
        let prolonged = ((volume as f64) * share).round().min(volume as f64) as u32;
        irt.push(volume);
        pirt.push(prolonged);
    }

    let ili = synth_ili(&irt, &pirt, &spec.ili, seed.wrapping_add(1));
    WeeklySeries {
        region: spec.region,
        weeks,
        irt,
        pirt,
        adjusted_irt: None,
        ili,
    }
}
