//! Lexicon-driven text segmentation and emoticon extraction.
//!
//! Segmentation is forward maximum matching: at every position the longest
//! lexicon entry wins, with a single-character fallback. The result is
//! deterministic, needs no model file, and the downstream classifier is
//! robust to its granularity. Emoticons follow the bracketed-literal
//! convention of microblog dumps (`[sad]`, `[haha]`, ...).

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
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

/// A segmentation dictionary: multi-character entries with optional
/// frequency weights.
///
/// Weights are carried for compatibility with common lexicon dumps; the
/// matcher itself only consults entry presence and length.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, f64>,
    max_chars: usize,
}

impl Lexicon {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut lex = Lexicon::default();
        for e in entries {
            lex.insert(e.into(), 1.0);
        }
        lex
    }

    /// Loads a UTF-8 lexicon file: one entry per line, optional
    /// tab-separated weight. Blank lines and `#` comments are skipped;
    /// duplicate entries keep the first weight seen.
    pub fn from_file(path: &Path) -> Result<Self, TextError> {
        let body = fs::read_to_string(path).map_err(|source| TextError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut lex = Lexicon::default();
        for (i, line) in body.lines().enumerate() {
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (entry, weight) = match line.split_once('\t') {
                Some((e, w)) => {
                    let weight = w.trim().parse::<f64>().map_err(|_| TextError::Parse {
                        path: path.display().to_string(),
                        line: i + 1,
                        message: format!("bad weight {w:?}"),
                    })?;
                    (e, weight)
                }
                None => (line, 1.0),
            };
            if entry.is_empty() {
                continue;
            }
            if !lex.entries.contains_key(entry) {
                lex.insert(entry.to_string(), weight);
            }
        }
        Ok(lex)
    }

    fn insert(&mut self, entry: String, weight: f64) {
        if entry.is_empty() {
            return;
        }
        self.max_chars = self.max_chars.max(entry.chars().count());
        self.entries.insert(entry, weight);
    }

    pub fn contains(&self, entry: &str) -> bool {
        self.entries.contains_key(entry)
    }

    pub fn weight(&self, entry: &str) -> Option<f64> {
        self.entries.get(entry).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest entry length in characters.
    pub fn max_chars(&self) -> usize {
        self.max_chars
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SegmentOptions {
    /// Keep single-character whitespace/punctuation fallback tokens in the
    /// output. Off by default; with it on, concatenating the tokens
    /// reproduces the input exactly.
    pub keep_separators: bool,
}

fn is_separator(c: char) -> bool {
    c.is_whitespace()
        || c.is_ascii_punctuation()
        || matches!(c,
            '\u{2000}'..='\u{206F}'   // general punctuation
            | '\u{3000}'..='\u{303F}' // CJK symbols and punctuation
            | '\u{FF01}'..='\u{FF0F}' // fullwidth forms (punctuation ranges)
            | '\u{FF1A}'..='\u{FF20}'
            | '\u{FF3B}'..='\u{FF40}'
            | '\u{FF5B}'..='\u{FF65}')
}

/// Splits `text` into tokens by forward maximum matching against
/// `lexicon`: at each position the longest matching entry is taken, and a
/// position with no match yields the single character (dropped when it is
/// whitespace or punctuation, unless `keep_separators` is set).
pub fn segment(text: &str, lexicon: &Lexicon, opts: SegmentOptions) -> Vec<String> {
    let char_starts: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
    let n = char_starts.len();
    let byte_end = |ci: usize| char_starts.get(ci).copied().unwrap_or(text.len());

    let mut tokens = Vec::new();
    let mut i = 0;
    while i < n {
        let start = char_starts[i];
        let longest = lexicon.max_chars().min(n - i);
        let mut matched_chars = 0;
        for len in (1..=longest).rev() {
            let candidate = &text[start..byte_end(i + len)];
            if lexicon.contains(candidate) {
                matched_chars = len;
                break;
            }
        }
        if matched_chars > 0 {
            tokens.push(text[start..byte_end(i + matched_chars)].to_string());
            i += matched_chars;
        } else {
            let c = text[start..].chars().next().expect("in-bounds char");
            if opts.keep_separators || !is_separator(c) {
                tokens.push(text[start..byte_end(i + 1)].to_string());
            }
            i += 1;
        }
    }
    tokens
}

/// The four emoticon groups: joy and happiness carry positive valence,
/// sadness and anger negative.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub enum EmoticonCategory {
    Joy,
    Happiness,
    Sadness,
    Anger,
}

impl EmoticonCategory {
    pub const ALL: [EmoticonCategory; 4] = [
        EmoticonCategory::Joy,
        EmoticonCategory::Happiness,
        EmoticonCategory::Sadness,
        EmoticonCategory::Anger,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EmoticonCategory::Joy => "joy",
            EmoticonCategory::Happiness => "happiness",
            EmoticonCategory::Sadness => "sadness",
            EmoticonCategory::Anger => "anger",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "joy" => Some(EmoticonCategory::Joy),
            "happiness" => Some(EmoticonCategory::Happiness),
            "sadness" => Some(EmoticonCategory::Sadness),
            "anger" => Some(EmoticonCategory::Anger),
            _ => None,
        }
    }
}

impl std::fmt::Display for EmoticonCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps bracketed emoticon literals (`[sad]`) to their category.
#[derive(Debug, Clone, Default)]
pub struct EmoticonTable {
    map: HashMap<String, EmoticonCategory>,
}

impl EmoticonTable {
    pub fn new<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, EmoticonCategory)>,
        S: Into<String>,
    {
        EmoticonTable {
            map: pairs.into_iter().map(|(l, c)| (l.into(), c)).collect(),
        }
    }

    /// Loads a `literal<TAB>category` file. Literals must be bracketed.
    pub fn from_file(path: &Path) -> Result<Self, TextError> {
        let body = fs::read_to_string(path).map_err(|source| TextError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut map = HashMap::new();
        for (i, line) in body.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| TextError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message,
            };
            let (literal, cat) = line
                .split_once('\t')
                .ok_or_else(|| err("expected literal<TAB>category".into()))?;
            if !(literal.starts_with('[') && literal.ends_with(']')) {
                return Err(err(format!("literal {literal:?} is not bracketed")));
            }
            let category = EmoticonCategory::parse(cat)
                .ok_or_else(|| err(format!("unknown category {cat:?}")))?;
            map.insert(literal.to_string(), category);
        }
        Ok(EmoticonTable { map })
    }

    pub fn category(&self, literal: &str) -> Option<EmoticonCategory> {
        self.map.get(literal).copied()
    }

    pub fn literals(&self) -> impl Iterator<Item = (&str, EmoticonCategory)> {
        self.map.iter().map(|(l, c)| (l.as_str(), *c))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Per-category emoticon counts for one piece of text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmoticonCounts {
    counts: [u32; 4],
}

impl EmoticonCounts {
    pub fn get(&self, cat: EmoticonCategory) -> u32 {
        self.counts[cat as usize]
    }

    pub fn add(&mut self, cat: EmoticonCategory, n: u32) {
        self.counts[cat as usize] += n;
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn merge(&self, other: &EmoticonCounts) -> EmoticonCounts {
        let mut out = *self;
        for (i, c) in other.counts.iter().enumerate() {
            out.counts[i] += c;
        }
        out
    }

    pub fn as_map(&self) -> BTreeMap<EmoticonCategory, u32> {
        EmoticonCategory::ALL
            .iter()
            .map(|&c| (c, self.get(c)))
            .collect()
    }
}

/// Counts known bracketed emoticon literals in `text`. Unknown literals
/// and unbalanced brackets are ignored; a nested `[` restarts the scan.
pub fn extract_emoticons(text: &str, table: &EmoticonTable) -> EmoticonCounts {
    let mut counts = EmoticonCounts::default();
    let mut open: Option<usize> = None;
    for (b, c) in text.char_indices() {
        match c {
            '[' => open = Some(b),
            ']' => {
                if let Some(s) = open.take() {
                    if let Some(cat) = table.category(&text[s..b + 1]) {
                        counts.add(cat, 1);
                    }
                }
            }
            _ => {}
        }
    }
    counts
}
