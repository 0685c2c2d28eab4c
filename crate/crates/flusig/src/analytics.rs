//! Regional and seasonal statistics: treatment-incentive ratios,
//! prolonged-case flags and ratios, chi-square tests, Pearson
//! correlation, and the carry-forward correction of weekly counts.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{assign_season, Post, Region, Season, SeasonMap, Week, WeeklySeries};
use crate::special::{chi_square_sf, student_t_two_sided};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("keyword set is empty")]
    EmptyKeywordSet,
    #[error("duplicate phrase {phrase:?}")]
    DuplicatePhrase { phrase: String },
    #[error("post {id:?} has no region assigned")]
    MissingRegion { id: String },
    #[error("contingency table needs at least 2 rows and 2 columns, got {rows}x{cols}")]
    TableTooSmall { rows: usize, cols: usize },
    #[error("contingency table is not rectangular or labels do not match counts")]
    MalformedTable,
    #[error("{which} marginal is zero")]
    ZeroMarginal { which: String },
    #[error("series lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least 3 paired observations, got {n}")]
    TooFewObservations { n: usize },
    #[error("{which} series is constant")]
    ConstantSeries { which: &'static str },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeywordRole {
    Hospital,
    Duration,
}

impl fmt::Display for KeywordRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeywordRole::Hospital => "hospital",
            KeywordRole::Duration => "duration",
        })
    }
}

/// Named set of phrases matched as substrings of raw post text
/// (case-insensitive), because multi-word phrases may be split by
/// segmentation but stay contiguous in the original text.
#[derive(Debug, Clone)]
pub struct KeywordSet {
    role: KeywordRole,
    phrases: Vec<String>,
}

impl KeywordSet {
    pub fn new<I, S>(role: KeywordRole, phrases: I) -> Result<KeywordSet, AnalyticsError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for phrase in phrases {
            let phrase = phrase.into().to_lowercase();
            if !seen.insert(phrase.clone()) {
                return Err(AnalyticsError::DuplicatePhrase { phrase });
            }
            out.push(phrase);
        }
        if out.is_empty() {
            return Err(AnalyticsError::EmptyKeywordSet);
        }
        Ok(KeywordSet { role, phrases: out })
    }

    /// One phrase per line; blank lines and `#` comments ignored.
    pub fn from_file(role: KeywordRole, path: &Path) -> Result<KeywordSet, AnalyticsError> {
        let body = fs::read_to_string(path).map_err(|source| AnalyticsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        KeywordSet::new(
            role,
            body.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    /// Built-in treatment-seeking phrase inventory.
    pub fn hospital_demo() -> KeywordSet {
        KeywordSet::new(
            KeywordRole::Hospital,
            crate::corpus::synth::hospital_phrases(),
        )
        .expect("demo phrases are valid")
    }

    /// Built-in prolonged-duration phrase inventory.
    pub fn duration_demo() -> KeywordSet {
        KeywordSet::new(
            KeywordRole::Duration,
            crate::corpus::synth::duration_phrases(),
        )
        .expect("demo phrases are valid")
    }

    pub fn role(&self) -> KeywordRole {
        self.role
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    /// True if any phrase occurs as a substring of the text.
    pub fn matches(&self, text: &str) -> bool {
        let text = text.to_lowercase();
        self.phrases.iter().any(|p| text.contains(p.as_str()))
    }
}

/// Fraction of posts per region and season whose raw text mentions any
/// treatment phrase. Empty groups are absent, never 0/0.
pub fn incentive_ratio(
    posts: &[Post],
    hospital: &KeywordSet,
    seasons: &SeasonMap,
) -> Result<BTreeMap<(Region, Season), f64>, AnalyticsError> {
    let mut hits: BTreeMap<(Region, Season), (u64, u64)> = BTreeMap::new();
    for post in posts {
        let region = post.region.ok_or_else(|| AnalyticsError::MissingRegion {
            id: post.id.clone(),
        })?;
        let season = assign_season(&post.timestamp, seasons);
        let cell = hits.entry((region, season)).or_insert((0, 0));
        cell.1 += 1;
        if hospital.matches(&post.text) {
            cell.0 += 1;
        }
    }
    Ok(hits
        .into_iter()
        .map(|(key, (matched, total))| (key, matched as f64 / total as f64))
        .collect())
}

/// True when the post's raw text mentions a prolonged-duration phrase.
pub fn flag_pirt(post: &Post, duration: &KeywordSet) -> bool {
    duration.matches(&post.text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new<S: Into<String>>(
        row_labels: Vec<S>,
        col_labels: Vec<S>,
        counts: Vec<Vec<u64>>,
    ) -> Result<ContingencyTable, AnalyticsError> {
        let rows = counts.len();
        let cols = counts.first().map(Vec::len).unwrap_or(0);
        if rows < 2 || cols < 2 {
            return Err(AnalyticsError::TableTooSmall { rows, cols });
        }
        if counts.iter().any(|r| r.len() != cols)
            || row_labels.len() != rows
            || col_labels.len() != cols
        {
            return Err(AnalyticsError::MalformedTable);
        }
        Ok(ContingencyTable {
            row_labels: row_labels.into_iter().map(Into::into).collect(),
            col_labels: col_labels.into_iter().map(Into::into).collect(),
            counts,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub expected: Vec<Vec<f64>>,
}

/// Pearson chi-square test of independence, without continuity
/// correction: expected[i][j] = row_i * col_j / total.
pub fn chi_square(table: &ContingencyTable) -> Result<ChiSquareResult, AnalyticsError> {
    let rows = table.counts.len();
    let cols = table.counts[0].len();
    let row_sums: Vec<u64> = table.counts.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..cols)
        .map(|j| table.counts.iter().map(|r| r[j]).sum())
        .collect();
    for (i, &s) in row_sums.iter().enumerate() {
        if s == 0 {
            return Err(AnalyticsError::ZeroMarginal {
                which: format!("row {:?}", table.row_labels[i]),
            });
        }
    }
    for (j, &s) in col_sums.iter().enumerate() {
        if s == 0 {
            return Err(AnalyticsError::ZeroMarginal {
                which: format!("column {:?}", table.col_labels[j]),
            });
        }
    }
    let total: u64 = row_sums.iter().sum();

    let mut statistic = 0.0;
    let mut expected = vec![vec![0.0; cols]; rows];
    for i in 0..rows {
        for j in 0..cols {
            let e = row_sums[i] as f64 * col_sums[j] as f64 / total as f64;
            expected[i][j] = e;
            let d = table.counts[i][j] as f64 - e;
            statistic += d * d / e;
        }
    }
    let dof = (rows - 1) * (cols - 1);
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
        expected,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Product-moment correlation with a two-sided p-value from
/// `t = r * sqrt((n-2)/(1-r^2))` on n-2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(AnalyticsError::TooFewObservations { n });
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(AnalyticsError::ConstantSeries { which: "x" });
    }
    if syy == 0.0 {
        return Err(AnalyticsError::ConstantSeries { which: "y" });
    }
    // single square root of the product so that y = +/-x yields exactly +/-1
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let dof = n - 2;
    let p_value = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (dof as f64 / (1.0 - r * r)).sqrt();
        student_t_two_sided(t, dof)
    };
    Ok(CorrelationResult { r, p_value, n })
}

/// Weekly prolonged-case share pirt[w]/irt[w]; weeks with zero IRT are
/// absent rather than divisions by zero.
pub fn pirt_ratio(series: &WeeklySeries) -> BTreeMap<Week, f64> {
    series
        .weeks
        .iter()
        .zip(series.irt.iter().zip(&series.pirt))
        .filter(|(_, (&irt, _))| irt > 0)
        .map(|(&week, (&irt, &pirt))| (week, pirt as f64 / irt as f64))
        .collect()
}

/// How prolonged cases are carried into the following week.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CarryMode {
    /// Add last week's prolonged count on top of this week's total.
    #[default]
    Add,
    /// Move prolonged counts out of their origin week before adding.
    Move,
}

impl CarryMode {
    pub fn parse(s: &str) -> Option<CarryMode> {
        match s {
            "add" => Some(CarryMode::Add),
            "move" => Some(CarryMode::Move),
            _ => None,
        }
    }
}

impl fmt::Display for CarryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CarryMode::Add => "add",
            CarryMode::Move => "move",
        })
    }
}

/// Fills `adjusted_irt` by carrying each week's prolonged count into
/// the next week. Add keeps the origin week intact
/// (`adj[w] = irt[w] + pirt[w-1]`); Move also subtracts it at the
/// origin (`adj[w] = irt[w] - pirt[w] + pirt[w-1]`).
pub fn adjust_irt(series: &WeeklySeries, mode: CarryMode) -> WeeklySeries {
    let n = series.irt.len();
    let mut adjusted = Vec::with_capacity(n);
    for w in 0..n {
        let carried = if w > 0 { series.pirt[w - 1] } else { 0 };
        let base = match mode {
            CarryMode::Add => series.irt[w],
            CarryMode::Move => series.irt[w] - series.pirt[w],
        };
        adjusted.push(base + carried);
    }
    WeeklySeries {
        adjusted_irt: Some(adjusted),
        ..series.clone()
    }
}

/// CSV export `region,season,ratio`.
pub fn write_incentive_csv(
    ratios: &BTreeMap<(Region, Season), f64>,
    path: &Path,
) -> Result<(), AnalyticsError> {
    let mut out = String::from("region,season,ratio\n");
    for ((region, season), ratio) in ratios {
        out.push_str(&format!("{region},{season},{ratio}\n"));
    }
    fs::write(path, out).map_err(|source| AnalyticsError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// CSV export `week,ratio`.
pub fn write_ratio_csv(ratios: &BTreeMap<Week, f64>, path: &Path) -> Result<(), AnalyticsError> {
    let mut out = String::from("week,ratio\n");
    for (week, ratio) in ratios {
        out.push_str(&format!("{week},{ratio}\n"));
    }
    fs::write(path, out).map_err(|source| AnalyticsError::Io {
        path: path.display().to_string(),
        source,
    })
}
