//! Post and ILI ingestion, calendar labeling, and weekly aggregation.
//!
//! The unit of analysis is a [`Post`]; sentinel surveillance arrives as
//! [`IliRecord`] rows keyed by ISO week and region. [`weekly_aggregate`]
//! joins the two into a [`WeeklySeries`] ready for the regression stage.

pub mod synth;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Datelike, FixedOffset, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
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
    #[error("province {province:?} is not in the region map")]
    UnmappedProvince { province: String },
    #[error("invalid ISO week {input:?} (expected YYYY-Www)")]
    BadWeek { input: String },
    #[error(
        "posts fall in weeks missing from the ILI series: {}",
        join_weeks(missing)
    )]
    WeekAlignment { missing: Vec<Week> },
    #[error("no ILI records for region {region}")]
    EmptyIli { region: Region },
    #[error("ILI weeks not contiguous: {week} follows {prev}")]
    NonContiguousIli { prev: Week, week: Week },
    #[error("duplicate ILI record for {week} in region {region}")]
    DuplicateIli { week: Week, region: Region },
    #[error("season map is missing month {month}")]
    IncompleteSeasonMap { month: u32 },
}

fn join_weeks(weeks: &[Week]) -> String {
    weeks
        .iter()
        .map(Week::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// One of the two sentinel monitoring areas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    North,
    South,
}

impl Region {
    pub const BOTH: [Region; 2] = [Region::North, Region::South];

    pub fn name(self) -> &'static str {
        match self {
            Region::North => "north",
            Region::South => "south",
        }
    }

    pub fn parse(s: &str) -> Option<Region> {
        match s.trim().to_ascii_lowercase().as_str() {
            "north" => Some(Region::North),
            "south" => Some(Region::South),
            _ => None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Spring,
    Summer,
    Autumn,
    Winter,
}

impl Season {
    pub const ALL: [Season; 4] = [
        Season::Spring,
        Season::Summer,
        Season::Autumn,
        Season::Winter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Autumn => "autumn",
            Season::Winter => "winter",
        }
    }

    pub fn parse(s: &str) -> Option<Season> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spring" => Some(Season::Spring),
            "summer" => Some(Season::Summer),
            "autumn" | "fall" => Some(Season::Autumn),
            "winter" => Some(Season::Winter),
            _ => None,
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classification state of a post.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    #[default]
    Unlabeled,
    Influenza,
    Noise,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Unlabeled => "unlabeled",
            Label::Influenza => "influenza",
            Label::Noise => "noise",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An ISO-8601 year-week, rendered as `YYYY-Www`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Week {
    year: i32,
    week: u32,
}

impl Week {
    /// Validates against the ISO calendar (some years have no week 53).
    pub fn new(year: i32, week: u32) -> Option<Week> {
        NaiveDate::from_isoywd_opt(year, week, Weekday::Mon).map(|_| Week { year, week })
    }

    pub fn from_date(date: NaiveDate) -> Week {
        let iso = date.iso_week();
        Week {
            year: iso.year(),
            week: iso.week(),
        }
    }

    /// Week of the timestamp's own local date.
    pub fn from_timestamp(ts: &DateTime<FixedOffset>) -> Week {
        Week::from_date(ts.date_naive())
    }

    pub fn parse(s: &str) -> Result<Week, CorpusError> {
        let bad = || CorpusError::BadWeek {
            input: s.to_string(),
        };
        let (y, w) = s.split_once("-W").ok_or_else(bad)?;
        let year: i32 = y.parse().map_err(|_| bad())?;
        let week: u32 = w.parse().map_err(|_| bad())?;
        Week::new(year, week).ok_or_else(bad)
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn week(self) -> u32 {
        self.week
    }

    pub fn monday(self) -> NaiveDate {
        NaiveDate::from_isoywd_opt(self.year, self.week, Weekday::Mon)
            .expect("validated at construction")
    }

    pub fn next(self) -> Week {
        Week::from_date(self.monday() + chrono::Days::new(7))
    }
}

impl fmt::Display for Week {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-W{:02}", self.year, self.week)
    }
}

impl Serialize for Week {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Week {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Week::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// One social-media message.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub timestamp: DateTime<FixedOffset>,
    pub province: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tokens: Vec<String>,
    #[serde(default)]
    pub label: Label,
}

impl Post {
    pub fn week(&self) -> Week {
        Week::from_timestamp(&self.timestamp)
    }
}

/// Province code → monitoring region.
#[derive(Debug, Clone, Default)]
pub struct RegionMap {
    map: BTreeMap<String, Region>,
}

impl RegionMap {
    pub fn new<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, Region)>,
        S: Into<String>,
    {
        RegionMap {
            map: pairs.into_iter().map(|(p, r)| (p.into(), r)).collect(),
        }
    }

    /// Loads `province<TAB>north|south` lines; `#` comments and blanks skipped.
    pub fn from_file(path: &Path) -> Result<Self, CorpusError> {
        let body = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut map = BTreeMap::new();
        for (i, line) in body.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| CorpusError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message,
            };
            let (province, region) = line
                .split_once('\t')
                .ok_or_else(|| err("expected province<TAB>region".into()))?;
            let region =
                Region::parse(region).ok_or_else(|| err(format!("unknown region {region:?}")))?;
            map.insert(province.trim().to_string(), region);
        }
        Ok(RegionMap { map })
    }

    pub fn region_of(&self, province: &str) -> Option<Region> {
        self.map.get(province).copied()
    }

    pub fn provinces(&self) -> impl Iterator<Item = (&str, Region)> {
        self.map.iter().map(|(p, r)| (p.as_str(), *r))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Calendar month → season. The default is the meteorological convention
/// (Mar-May spring, Jun-Aug summer, Sep-Nov autumn, Dec-Feb winter).
#[derive(Debug, Clone)]
pub struct SeasonMap {
    months: [Season; 12],
}

impl Default for SeasonMap {
    fn default() -> Self {
        use Season::*;
        SeasonMap {
            months: [
                Winter, Winter, Spring, Spring, Spring, Summer, Summer, Summer, Autumn, Autumn,
                Autumn, Winter,
            ],
        }
    }
}

impl SeasonMap {
    /// Loads `month<TAB>season` lines; every month 1-12 must be covered.
    pub fn from_file(path: &Path) -> Result<Self, CorpusError> {
        let body = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut months = [None; 12];
        for (i, line) in body.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| CorpusError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message,
            };
            let (month, season) = line
                .split_once('\t')
                .ok_or_else(|| err("expected month<TAB>season".into()))?;
            let month: usize = month
                .trim()
                .parse()
                .ok()
                .filter(|m| (1..=12).contains(m))
                .ok_or_else(|| err(format!("bad month {month:?}")))?;
            let season =
                Season::parse(season).ok_or_else(|| err(format!("unknown season {season:?}")))?;
            months[month - 1] = Some(season);
        }
        for (i, slot) in months.iter().enumerate() {
            if slot.is_none() {
                return Err(CorpusError::IncompleteSeasonMap {
                    month: i as u32 + 1,
                });
            }
        }
        Ok(SeasonMap {
            months: months.map(|s| s.expect("checked above")),
        })
    }

    pub fn season_of_month(&self, month: u32) -> Season {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        self.months[month as usize - 1]
    }
}

/// Looks up the season of the timestamp's local month.
pub fn assign_season(ts: &DateTime<FixedOffset>, map: &SeasonMap) -> Season {
    map.season_of_month(ts.date_naive().month())
}

/// Returns a copy of `post` with its region set from the map; every other
/// field is untouched, so the operation is idempotent.
pub fn assign_region(post: &Post, map: &RegionMap) -> Result<Post, CorpusError> {
    let region = map
        .region_of(&post.province)
        .ok_or_else(|| CorpusError::UnmappedProvince {
            province: post.province.clone(),
        })?;
    let mut out = post.clone();
    out.region = Some(region);
    Ok(out)
}

pub fn assign_regions(posts: &[Post], map: &RegionMap) -> Result<Vec<Post>, CorpusError> {
    posts.iter().map(|p| assign_region(p, map)).collect()
}

/// One sentinel surveillance observation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IliRecord {
    pub week: Week,
    pub region: Region,
    pub ili_pct: f64,
}

/// Reads `week,region,ili_pct` CSV rows.
pub fn read_ili_csv(path: &Path) -> Result<Vec<IliRecord>, CorpusError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CorpusError::Parse {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut records = Vec::new();
    for (i, row) in reader.deserialize::<IliRecord>().enumerate() {
        let record = row.map_err(|e| CorpusError::Parse {
            path: path.display().to_string(),
            line: i + 2,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_ili_csv(path: &Path, records: &[IliRecord]) -> Result<(), CorpusError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| CorpusError::Parse {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    for r in records {
        writer.serialize(r).map_err(|e| CorpusError::Parse {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
    }
    writer.flush().map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}

/// Aligned weekly signals for one region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeeklySeries {
    pub region: Region,
    pub weeks: Vec<Week>,
    pub irt: Vec<u32>,
    pub pirt: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjusted_irt: Option<Vec<u32>>,
    pub ili: Vec<f64>,
}

impl WeeklySeries {
    pub fn len(&self) -> usize {
        self.weeks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weeks.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostFormat {
    Jsonl,
    Csv,
}

/// A skipped input line and why.
#[derive(Debug, Clone)]
pub struct SkipDiagnostic {
    pub line: usize,
    pub reason: String,
}

/// Ingestion result: parseable posts in file order, plus diagnostics for
/// every malformed line (dirty feeds are skipped loudly, never silently).
#[derive(Debug, Clone)]
pub struct Ingest {
    pub posts: Vec<Post>,
    pub skipped: Vec<SkipDiagnostic>,
}

#[derive(Debug, Deserialize)]
struct CsvPostRow {
    id: String,
    timestamp: String,
    province: String,
    text: String,
    #[serde(default)]
    label: Option<String>,
}

pub fn ingest_posts(path: &Path, format: PostFormat) -> Result<Ingest, CorpusError> {
    match format {
        PostFormat::Jsonl => ingest_jsonl(path),
        PostFormat::Csv => ingest_csv(path),
    }
}

fn validate_post(post: Post) -> Result<Post, String> {
    if post.text.is_empty() {
        return Err("empty text".to_string());
    }
    Ok(post)
}

fn ingest_jsonl(path: &Path) -> Result<Ingest, CorpusError> {
    let body = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut posts = Vec::new();
    let mut skipped = Vec::new();
    for (i, line) in body.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<Post>(line)
            .map_err(|e| e.to_string())
            .and_then(validate_post);
        match parsed {
            Ok(post) => posts.push(post),
            Err(reason) => skipped.push(SkipDiagnostic {
                line: i + 1,
                reason,
            }),
        }
    }
    Ok(Ingest { posts, skipped })
}

fn ingest_csv(path: &Path) -> Result<Ingest, CorpusError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CorpusError::Parse {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut posts = Vec::new();
    let mut skipped = Vec::new();
    for (i, row) in reader.deserialize::<CsvPostRow>().enumerate() {
        let line = i + 2;
        let parsed = row.map_err(|e| e.to_string()).and_then(|r| {
            let timestamp = DateTime::parse_from_rfc3339(&r.timestamp)
                .map_err(|e| format!("bad timestamp {:?}: {e}", r.timestamp))?;
            let label = match r.label.as_deref().map(str::trim) {
                None | Some("") => Label::Unlabeled,
                Some("influenza") => Label::Influenza,
                Some("noise") => Label::Noise,
                Some("unlabeled") => Label::Unlabeled,
                Some(other) => return Err(format!("unknown label {other:?}")),
            };
            validate_post(Post {
                id: r.id,
                timestamp,
                province: r.province,
                region: None,
                text: r.text,
                tokens: Vec::new(),
                label,
            })
        });
        match parsed {
            Ok(post) => posts.push(post),
            Err(reason) => skipped.push(SkipDiagnostic { line, reason }),
        }
    }
    Ok(Ingest { posts, skipped })
}

/// Writes posts as one JSON object per line, in order.
pub fn write_posts_jsonl(path: &Path, posts: &[Post]) -> Result<(), CorpusError> {
    let mut out = String::new();
    for post in posts {
        out.push_str(&serde_json::to_string(post).expect("post serialization is infallible"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Counts influenza posts of `region` per ISO week of the region's ILI
/// series; `is_pirt` marks the prolonged subset. Counting is associative,
/// so the result is independent of post order.
pub fn weekly_aggregate<F>(
    posts: &[Post],
    ili: &[IliRecord],
    region: Region,
    is_pirt: F,
) -> Result<WeeklySeries, CorpusError>
where
    F: Fn(&Post) -> bool,
{
    let mut recs: Vec<&IliRecord> = ili.iter().filter(|r| r.region == region).collect();
    recs.sort_by_key(|r| r.week);
    if recs.is_empty() {
        return Err(CorpusError::EmptyIli { region });
    }
    for pair in recs.windows(2) {
        if pair[1].week == pair[0].week {
            return Err(CorpusError::DuplicateIli {
                week: pair[0].week,
                region,
            });
        }
        if pair[1].week != pair[0].week.next() {
            return Err(CorpusError::NonContiguousIli {
                prev: pair[0].week,
                week: pair[1].week,
            });
        }
    }

    let weeks: Vec<Week> = recs.iter().map(|r| r.week).collect();
    let index: BTreeMap<Week, usize> = weeks.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let mut irt = vec![0u32; weeks.len()];
    let mut pirt = vec![0u32; weeks.len()];
    let mut missing = Vec::new();
    for post in posts {
        if post.label != Label::Influenza || post.region != Some(region) {
            continue;
        }
        let week = post.week();
        match index.get(&week) {
            Some(&i) => {
                irt[i] += 1;
                if is_pirt(post) {
                    pirt[i] += 1;
                }
            }
            None => missing.push(week),
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(CorpusError::WeekAlignment { missing });
    }
    Ok(WeeklySeries {
        region,
        weeks,
        irt,
        pirt,
        adjusted_irt: None,
        ili: recs.iter().map(|r| r.ili_pct).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> DateTime<FixedOffset> {
        DateTime::parse_from_rfc3339(s).unwrap()
    }

    fn post(id: &str, stamp: &str, province: &str, region: Region, label: Label) -> Post {
        Post {
            id: id.to_string(),
            timestamp: ts(stamp),
            province: province.to_string(),
            region: Some(region),
            text: "x".to_string(),
            tokens: Vec::new(),
            label,
        }
    }

    #[test]
    fn week_parse_display_roundtrip() {
        let w = Week::parse("2016-W04").unwrap();
        assert_eq!(w.year(), 2016);
        assert_eq!(w.week(), 4);
        assert_eq!(w.to_string(), "2016-W04");
        assert!(Week::parse("2016-04").is_err());
        assert!(Week::parse("2019-W53").is_err()); // 2019 has 52 ISO weeks
        assert!(Week::parse("2020-W53").is_ok());
    }

    #[test]
    fn week_of_study_window_start() {
        assert_eq!(
            Week::from_date(NaiveDate::from_ymd_opt(2016, 1, 25).unwrap()),
            Week::parse("2016-W04").unwrap()
        );
        assert_eq!(
            Week::from_date(NaiveDate::from_ymd_opt(2016, 12, 31).unwrap()),
            Week::parse("2016-W52").unwrap()
        );
    }

    #[test]
    fn week_next_crosses_year_boundary() {
        let w = Week::parse("2016-W52").unwrap();
        assert_eq!(w.next().to_string(), "2017-W01");
        assert_eq!(
            Week::parse("2016-W04").unwrap().next().to_string(),
            "2016-W05"
        );
    }

    #[test]
    fn season_defaults() {
        let map = SeasonMap::default();
        assert_eq!(
            assign_season(&ts("2016-04-15T12:00:00+08:00"), &map),
            Season::Spring
        );
        assert_eq!(
            assign_season(&ts("2016-12-01T00:00:00+08:00"), &map),
            Season::Winter
        );
        assert_eq!(
            assign_season(&ts("2016-06-01T00:00:00+08:00"), &map),
            Season::Summer
        );
    }

    #[test]
    fn region_assignment() {
        let map = RegionMap::new([("Guangdong", Region::South)]);
        let p = Post {
            region: None,
            ..post(
                "1",
                "2016-02-01T08:00:00+08:00",
                "Guangdong",
                Region::North,
                Label::Unlabeled,
            )
        };
        let assigned = assign_region(&p, &map).unwrap();
        assert_eq!(assigned.region, Some(Region::South));
        assert_eq!(assigned.id, p.id);
        assert_eq!(assigned.text, p.text);
        let twice = assign_region(&assigned, &map).unwrap();
        assert_eq!(twice.region, Some(Region::South));

        let err = assign_region(
            &Post {
                province: "X".to_string(),
                ..p.clone()
            },
            &map,
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::UnmappedProvince { province } if province == "X"));
    }

    #[test]
    fn jsonl_ingest_order_and_skips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("posts.jsonl");
        std::fs::write(&p, "").unwrap();
        let empty = ingest_posts(&p, PostFormat::Jsonl).unwrap();
        assert!(empty.posts.is_empty());
        assert!(empty.skipped.is_empty());

        std::fs::write(
            &p,
            concat!(
                r#"{"id":"a","timestamp":"2016-02-01T08:00:00+08:00","province":"Hebei","text":"t1"}"#,
                "\n",
                r#"{"id":"b","timestamp":"2016-02-02T08:00:00+08:00","province":"Hunan","text":"t2","label":"influenza"}"#,
                "\n",
                r#"{"id":"c","timestamp":"2016-02-03T08:00:00+08:00","province":"Hubei"}"#,
                "\n",
                r#"{"id":"d","timestamp":"2016-02-04T08:00:00+08:00","province":"Anhui","text":"t4"}"#,
                "\n"
            ),
        )
        .unwrap();
        let got = ingest_posts(&p, PostFormat::Jsonl).unwrap();
        assert_eq!(
            got.posts.iter().map(|p| p.id.as_str()).collect::<Vec<_>>(),
            ["a", "b", "d"]
        );
        assert_eq!(got.posts[1].label, Label::Influenza);
        assert_eq!(got.skipped.len(), 1);
        assert_eq!(got.skipped[0].line, 3);
        assert!(got.skipped[0].reason.contains("text"));
    }

    #[test]
    fn csv_ingest_skips_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("posts.csv");
        std::fs::write(
            &p,
            "id,timestamp,province,text,label\n\
             a,2016-02-01T08:00:00+08:00,Hebei,t1,\n\
             b,not-a-time,Hunan,t2,noise\n\
             c,2016-02-03T08:00:00+08:00,Hubei,t3,noise\n",
        )
        .unwrap();
        let got = ingest_posts(&p, PostFormat::Csv).unwrap();
        assert_eq!(got.posts.len(), 2);
        assert_eq!(got.posts[1].label, Label::Noise);
        assert_eq!(got.skipped.len(), 1);
        assert_eq!(got.skipped[0].line, 3);
    }

    #[test]
    fn jsonl_roundtrip_preserves_posts() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.jsonl");
        let posts = vec![post(
            "a",
            "2016-02-01T08:00:00+08:00",
            "Hebei",
            Region::North,
            Label::Influenza,
        )];
        write_posts_jsonl(&p, &posts).unwrap();
        let got = ingest_posts(&p, PostFormat::Jsonl).unwrap();
        assert_eq!(got.posts.len(), 1);
        assert_eq!(got.posts[0].id, "a");
        assert_eq!(got.posts[0].region, Some(Region::North));
        assert_eq!(got.posts[0].label, Label::Influenza);
    }

    fn ili_weeks(region: Region, first: &str, n: usize) -> Vec<IliRecord> {
        let mut week = Week::parse(first).unwrap();
        let mut out = Vec::new();
        for i in 0..n {
            out.push(IliRecord {
                week,
                region,
                ili_pct: 1.0 + i as f64,
            });
            week = week.next();
        }
        out
    }

    #[test]
    fn aggregate_counts_and_conserves() {
        let ili = ili_weeks(Region::North, "2016-W09", 4);
        // week 10 of 2016 starts Monday 2016-03-07
        let mut posts = Vec::new();
        for i in 0..5 {
            posts.push(post(
                &format!("p{i}"),
                "2016-03-08T10:00:00+08:00",
                "Hebei",
                Region::North,
                Label::Influenza,
            ));
        }
        posts.push(post(
            "n1",
            "2016-03-08T10:00:00+08:00",
            "Hebei",
            Region::North,
            Label::Noise,
        ));
        posts.push(post(
            "s1",
            "2016-03-08T10:00:00+08:00",
            "Hunan",
            Region::South,
            Label::Influenza,
        ));

        let flagged = ["p0", "p3"];
        let series = weekly_aggregate(&posts, &ili, Region::North, |p| {
            flagged.contains(&p.id.as_str())
        })
        .unwrap();
        assert_eq!(series.weeks.len(), 4);
        assert_eq!(series.irt, [0, 5, 0, 0]);
        assert_eq!(series.pirt, [0, 2, 0, 0]);
        assert_eq!(series.ili, [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(series.irt.iter().sum::<u32>(), 5);

        // empty corpus: all-zero but full axis
        let empty = weekly_aggregate(&[], &ili, Region::North, |_| false).unwrap();
        assert_eq!(empty.irt, [0, 0, 0, 0]);

        // order independence
        let mut reversed = posts.clone();
        reversed.reverse();
        let series2 = weekly_aggregate(&reversed, &ili, Region::North, |p| {
            flagged.contains(&p.id.as_str())
        })
        .unwrap();
        assert_eq!(series2.irt, series.irt);
        assert_eq!(series2.pirt, series.pirt);
    }

    #[test]
    fn aggregate_reports_missing_weeks() {
        let ili = ili_weeks(Region::North, "2016-W09", 2);
        let posts = vec![post(
            "late",
            "2016-06-01T10:00:00+08:00",
            "Hebei",
            Region::North,
            Label::Influenza,
        )];
        let err = weekly_aggregate(&posts, &ili, Region::North, |_| false).unwrap_err();
        match err {
            CorpusError::WeekAlignment { missing } => {
                assert_eq!(missing, [Week::parse("2016-W22").unwrap()]);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn aggregate_rejects_gappy_or_duplicate_ili() {
        let mut ili = ili_weeks(Region::South, "2016-W04", 2);
        ili.push(IliRecord {
            week: Week::parse("2016-W07").unwrap(),
            region: Region::South,
            ili_pct: 1.0,
        });
        assert!(matches!(
            weekly_aggregate(&[], &ili, Region::South, |_| false),
            Err(CorpusError::NonContiguousIli { .. })
        ));

        let dup = vec![
            IliRecord {
                week: Week::parse("2016-W04").unwrap(),
                region: Region::South,
                ili_pct: 1.0,
            },
            IliRecord {
                week: Week::parse("2016-W04").unwrap(),
                region: Region::South,
                ili_pct: 2.0,
            },
        ];
        assert!(matches!(
            weekly_aggregate(&[], &dup, Region::South, |_| false),
            Err(CorpusError::DuplicateIli { .. })
        ));

        assert!(matches!(
            weekly_aggregate(&[], &[], Region::South, |_| false),
            Err(CorpusError::EmptyIli { .. })
        ));
    }

    #[test]
    fn ili_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ili.csv");
        let records = ili_weeks(Region::North, "2016-W04", 3);
        write_ili_csv(&p, &records).unwrap();
        let body = std::fs::read_to_string(&p).unwrap();
        assert!(body.starts_with("week,region,ili_pct\n"));
        assert!(body.contains("2016-W04,north,1.0"));
        let back = read_ili_csv(&p).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[0].week, records[0].week);
        assert_eq!(back[2].ili_pct, 3.0);
    }
}
