//! Word lists used by the bias, affect and moral features.
//!
//! File format: UTF-8, one entry per line. An entry is a word or a
//! multi-word phrase, optionally followed by tab-separated `key=value`
//! attributes:
//!
//! | key        | values                        |
//! |------------|-------------------------------|
//! | `valence`  | float in [-4, 4]              |
//! | `polarity` | `pos`, `neg`, `neu`           |
//! | `strength` | `weak`, `strong`              |
//! | `moral`    | one of [`MORAL_CATEGORIES`]   |
//!
//! Blank lines and lines starting with `#` are ignored. Entries are
//! lowercased and their whitespace collapsed to single spaces. A single-word
//! entry ending in `*` matches every word with that prefix.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use super::TextError;

/// Lexicons that feature extraction needs, by file stem.
pub const REQUIRED_LEXICONS: &[&str] = &[
    "stopwords",
    "bias_words",
    "assertatives",
    "hedges",
    "implicatives",
    "report_verbs",
    "opinion_positive",
    "opinion_negative",
    "subjectivity",
    "moral",
    "sentiment",
];

pub const MORAL_CATEGORIES: &[&str] = &[
    "HarmVirtue",
    "HarmVice",
    "FairnessVirtue",
    "FairnessVice",
    "IngroupVirtue",
    "IngroupVice",
    "AuthorityVirtue",
    "AuthorityVice",
    "PurityVirtue",
    "PurityVice",
];

const BUILTIN: &[(&str, &str)] = &[
    ("stopwords", include_str!("../../data/lexicons/stopwords.txt")),
    ("bias_words", include_str!("../../data/lexicons/bias_words.txt")),
    ("assertatives", include_str!("../../data/lexicons/assertatives.txt")),
    ("hedges", include_str!("../../data/lexicons/hedges.txt")),
    ("implicatives", include_str!("../../data/lexicons/implicatives.txt")),
    ("report_verbs", include_str!("../../data/lexicons/report_verbs.txt")),
    ("opinion_positive", include_str!("../../data/lexicons/opinion_positive.txt")),
    ("opinion_negative", include_str!("../../data/lexicons/opinion_negative.txt")),
    ("subjectivity", include_str!("../../data/lexicons/subjectivity.txt")),
    ("moral", include_str!("../../data/lexicons/moral.txt")),
    ("sentiment", include_str!("../../data/lexicons/sentiment.txt")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Pos,
    Neg,
    Neu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strength {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntryAttrs {
    pub valence: Option<f64>,
    pub polarity: Option<Polarity>,
    pub strength: Option<Strength>,
    pub moral: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    name: String,
    entries: BTreeMap<String, EntryAttrs>,
    /// Prefix entries (`abus*`), stored without the `*`.
    prefixes: BTreeMap<String, EntryAttrs>,
    max_phrase_words: usize,
}

/// One lexicon hit over a word sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Hit<'a> {
    pub start: usize,
    pub len: usize,
    pub attrs: &'a EntryAttrs,
}

fn normalize(entry: &str) -> String {
    entry
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

impl Lexicon {
    pub fn parse(name: &str, source_name: &str, text: &str) -> Result<Self, TextError> {
        let err = |line: usize, message: String| TextError::LexiconParse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut entries = BTreeMap::new();
        let mut prefixes = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let entry = normalize(fields.next().unwrap_or(""));
            if entry.is_empty() {
                return Err(err(line_no, "empty entry".into()));
            }
            let mut attrs = EntryAttrs::default();
            for field in fields.map(str::trim).filter(|f| !f.is_empty()) {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| err(line_no, format!("attribute {field:?} is not key=value")))?;
                match key {
                    "valence" => {
                        let v: f64 = value
                            .parse()
                            .map_err(|_| err(line_no, format!("bad valence {value:?}")))?;
                        if !(-4.0..=4.0).contains(&v) {
                            return Err(err(line_no, format!("valence {v} outside [-4, 4]")));
                        }
                        attrs.valence = Some(v);
                    }
                    "polarity" => {
                        attrs.polarity = Some(match value {
                            "pos" | "positive" => Polarity::Pos,
                            "neg" | "negative" => Polarity::Neg,
                            "neu" | "neutral" | "both" => Polarity::Neu,
                            _ => return Err(err(line_no, format!("bad polarity {value:?}"))),
                        })
                    }
                    "strength" => {
                        attrs.strength = Some(match value {
                            "weak" | "weaksubj" => Strength::Weak,
                            "strong" | "strongsubj" => Strength::Strong,
                            _ => return Err(err(line_no, format!("bad strength {value:?}"))),
                        })
                    }
                    "moral" => {
                        let cat = MORAL_CATEGORIES
                            .iter()
                            .find(|c| **c == value)
                            .ok_or_else(|| err(line_no, format!("unknown moral category {value:?}")))?;
                        attrs.moral = Some(cat);
                    }
                    _ => return Err(err(line_no, format!("unknown attribute {key:?}"))),
                }
            }
            match entry.strip_suffix('*') {
                Some(stem) if !stem.contains(' ') && !stem.is_empty() => {
                    prefixes.insert(stem.to_string(), attrs);
                }
                Some(_) => return Err(err(line_no, "wildcards are only allowed on single words".into())),
                None => {
                    entries.insert(entry, attrs);
                }
            }
        }
        if entries.is_empty() && prefixes.is_empty() {
            return Err(TextError::EmptyLexicon(name.to_string()));
        }
        let max_phrase_words = entries
            .keys()
            .map(|e| e.split(' ').count())
            .max()
            .unwrap_or(1);
        Ok(Lexicon {
            name: name.to_string(),
            entries,
            prefixes,
            max_phrase_words,
        })
    }

    pub fn load(name: &str, path: &Path) -> Result<Self, TextError> {
        let text = fs::read_to_string(path).map_err(|source| TextError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(name, &path.display().to_string(), &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.entries.len() + self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact or prefix lookup of a single lowercase word.
    pub fn get(&self, word: &str) -> Option<&EntryAttrs> {
        if let Some(a) = self.entries.get(word) {
            return Some(a);
        }
        // the longest matching prefix wins
        (1..=word.len())
            .rev()
            .filter(|&k| word.is_char_boundary(k))
            .find_map(|k| self.prefixes.get(&word[..k]))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some()
    }

    /// Non-overlapping hits over lowercase `words`, scanning left to right
    /// and preferring the longest phrase at each position.
    pub fn hits<'a, S: AsRef<str>>(&'a self, words: &[S]) -> Vec<Hit<'a>> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let mut matched = None;
            let max = self.max_phrase_words.min(words.len() - i);
            for len in (2..=max).rev() {
                let phrase = words[i..i + len]
                    .iter()
                    .map(AsRef::as_ref)
                    .collect::<Vec<_>>()
                    .join(" ");
                if let Some(a) = self.entries.get(&phrase) {
                    matched = Some((len, a));
                    break;
                }
            }
            if matched.is_none() {
                matched = self.get(words[i].as_ref()).map(|a| (1, a));
            }
            match matched {
                Some((len, attrs)) => {
                    out.push(Hit { start: i, len, attrs });
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }
}

/// Named lexicons keyed by the stems in [`REQUIRED_LEXICONS`].
#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    lexicons: HashMap<String, Lexicon>,
}

impl LexiconSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The small default lexicons shipped with the crate.
    pub fn builtin() -> Self {
        let mut set = Self::new();
        for (name, text) in BUILTIN {
            let lex = Lexicon::parse(name, &format!("<builtin>/{name}.txt"), text)
                .expect("bundled lexicon is valid");
            set.insert(lex);
        }
        set
    }

    /// Loads `<dir>/<name>.txt` for every required lexicon.
    pub fn load_dir(dir: &Path) -> Result<Self, TextError> {
        let mut set = Self::new();
        for name in REQUIRED_LEXICONS {
            let path = dir.join(format!("{name}.txt"));
            if !path.exists() {
                return Err(TextError::MissingLexicon(format!(
                    "{name} (expected {})",
                    path.display()
                )));
            }
            set.insert(Lexicon::load(name, &path)?);
        }
        Ok(set)
    }

    /// Built-in lexicons, replaced by any `<dir>/<name>.txt` that exists.
    pub fn builtin_with_overrides(dir: &Path) -> Result<Self, TextError> {
        let mut set = Self::builtin();
        for name in REQUIRED_LEXICONS {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                set.insert(Lexicon::load(name, &path)?);
            }
        }
        Ok(set)
    }

    pub fn insert(&mut self, lexicon: Lexicon) {
        self.lexicons.insert(lexicon.name.clone(), lexicon);
    }

    pub fn remove(&mut self, name: &str) -> Option<Lexicon> {
        self.lexicons.remove(name)
    }

    pub fn get(&self, name: &str) -> Option<&Lexicon> {
        self.lexicons.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&Lexicon, TextError> {
        self.get(name)
            .ok_or_else(|| TextError::MissingLexicon(name.to_string()))
    }

    /// Fails on the first required lexicon that is absent.
    pub fn check_complete(&self) -> Result<(), TextError> {
        for name in REQUIRED_LEXICONS {
            self.require(name)?;
        }
        Ok(())
    }
}
