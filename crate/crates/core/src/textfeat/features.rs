//! The canonical feature schema and per-article extraction.
//!
//! Normalizations:
//! - punctuation, POS, lexicon, subjectivity, moral and date features are
//!   counts divided by the total token count (words, numbers and
//!   punctuation);
//! - `allcaps` is divided by the word count;
//! - `ttr` is distinct lowercased words over words, `avg_wordlen` is letters
//!   over words, `word_count` is the raw word count;
//! - `smog_index = 1.0430 * sqrt(polysyllables * 30 / sentences) + 3.1291`,
//!   applied to texts of any length (polysyllables have 3+ syllables,
//!   counted on the letters of each word token);
//! - `coleman_liau_index = 0.0588 * L - 0.296 * S - 15.8` with L letters and
//!   S sentences per 100 words;
//! - `vadneg`, `vadneu`, `vadpos` are the sentiment proportions.
//!
//! Features are computed on the article body only.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::dates::count_dates;
use super::lexicon::{LexiconSet, Polarity, Strength, MORAL_CATEGORIES};
use super::pos::pos_tag;
use super::sentiment::sentiment_scores;
use super::syllables::count_syllables;
use super::tokenize::{tokenize, TokenizedDoc};
use super::TextError;
use crate::corpus::Article;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    Style,
    Complexity,
    Bias,
    Affect,
    Moral,
    Event,
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FeatureGroup::Style => "style",
            FeatureGroup::Complexity => "complexity",
            FeatureGroup::Bias => "bias",
            FeatureGroup::Affect => "affect",
            FeatureGroup::Moral => "moral",
            FeatureGroup::Event => "event",
        };
        f.write_str(s)
    }
}

use FeatureGroup::*;

/// Feature names in canonical order with their group.
pub const CANONICAL_FEATURES: &[(&str, FeatureGroup)] = &[
    ("quotes", Style),
    ("exclaim", Style),
    ("allpunc", Style),
    ("allcaps", Style),
    ("stops", Style),
    ("CC", Style),
    ("CD", Style),
    ("DT", Style),
    ("IN", Style),
    ("JJ", Style),
    ("MD", Style),
    ("NNS", Style),
    ("NNP", Style),
    ("PRP", Style),
    ("PRP$", Style),
    ("RB", Style),
    ("TO", Style),
    ("WP$", Style),
    ("WRB", Style),
    ("VB", Style),
    ("VBD", Style),
    ("VBG", Style),
    ("VBN", Style),
    ("VBZ", Style),
    ("WDT", Style),
    ("ttr", Complexity),
    ("avg_wordlen", Complexity),
    ("word_count", Complexity),
    ("smog_index", Complexity),
    ("coleman_liau_index", Complexity),
    ("bias_words", Bias),
    ("assertatives", Bias),
    ("hedges", Bias),
    ("implicatives", Bias),
    ("report_verbs", Bias),
    ("positive_opinion_words", Bias),
    ("negative_opinion_words", Bias),
    ("vadneg", Affect),
    ("vadneu", Affect),
    ("vadpos", Affect),
    ("wneg", Affect),
    ("wpos", Affect),
    ("wneu", Affect),
    ("sneg", Affect),
    ("spos", Affect),
    ("IngroupVirtue", Moral),
    ("IngroupVice", Moral),
    ("AuthorityVice", Moral),
    ("PurityVirtue", Moral),
    ("num_dates", Event),
];

/// Features whose value is a proportion and therefore lies in [0, 1].
pub fn is_ratio_feature(name: &str) -> bool {
    !matches!(
        name,
        "avg_wordlen" | "word_count" | "smog_index" | "coleman_liau_index"
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    names: Vec<String>,
    groups: Vec<FeatureGroup>,
}

impl FeatureSchema {
    pub fn canonical() -> &'static FeatureSchema {
        static SCHEMA: OnceLock<FeatureSchema> = OnceLock::new();
        SCHEMA.get_or_init(|| FeatureSchema {
            names: CANONICAL_FEATURES.iter().map(|(n, _)| n.to_string()).collect(),
            groups: CANONICAL_FEATURES.iter().map(|(_, g)| *g).collect(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn group_of(&self, name: &str) -> Option<FeatureGroup> {
        self.index_of(name).map(|i| self.groups[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, FeatureGroup)> {
        self.names.iter().map(String::as_str).zip(self.groups.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub article_id: String,
    /// Aligned to [`FeatureSchema::canonical`].
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        FeatureSchema::canonical()
            .index_of(name)
            .map(|i| self.values[i])
    }

    pub fn named(&self) -> impl Iterator<Item = (&str, f64)> {
        FeatureSchema::canonical()
            .names()
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
    }
}

fn is_quote(text: &str) -> bool {
    matches!(text, "\"" | "'" | "`" | "\u{201C}" | "\u{201D}" | "\u{2018}" | "\u{2019}")
}

fn letters_only(word: &str) -> String {
    word.chars().filter(char::is_ascii_alphabetic).collect()
}

/// Lowercased word tokens per sentence, so phrases never span sentences.
fn sentence_words(doc: &TokenizedDoc) -> Vec<Vec<String>> {
    doc.sentences()
        .map(|s| s.iter().filter(|t| t.is_word()).map(|t| t.lower()).collect())
        .collect()
}

fn count_hits(words: &[Vec<String>], lex: &super::lexicon::Lexicon) -> usize {
    words.iter().map(|s| lex.hits(s).len()).sum()
}

/// Ratios of every moral category (all ten, not only the schema four).
pub fn moral_scores(text: &str, lexicons: &LexiconSet) -> Result<BTreeMap<&'static str, f64>, TextError> {
    let doc = tokenize(text)?;
    let lex = lexicons.require("moral")?;
    let total = doc.tokens().len() as f64;
    let mut counts: BTreeMap<&'static str, usize> = MORAL_CATEGORIES.iter().map(|c| (*c, 0)).collect();
    for s in sentence_words(&doc) {
        for hit in lex.hits(&s) {
            if let Some(cat) = hit.attrs.moral {
                *counts.get_mut(cat).expect("known category") += 1;
            }
        }
    }
    Ok(counts.into_iter().map(|(k, v)| (k, v as f64 / total)).collect())
}

pub fn extract_features(article: &Article, lexicons: &LexiconSet) -> Result<FeatureVector, TextError> {
    let values = extract_text_features(&article.text, lexicons).map_err(|e| match e {
        TextError::NoWords(_) => TextError::NoWords(article.id.clone()),
        other => other,
    })?;
    Ok(FeatureVector {
        article_id: article.id.clone(),
        values,
    })
}

/// Canonical feature values of a raw text.
pub fn extract_text_features(text: &str, lexicons: &LexiconSet) -> Result<Vec<f64>, TextError> {
    lexicons.check_complete()?;
    let doc = tokenize(text)?;
    let tokens = doc.tokens();
    let n_tokens = tokens.len() as f64;
    let n_words = doc.words();
    if n_words == 0 {
        return Err(TextError::NoWords(String::new()));
    }
    let words_f = n_words as f64;
    let ratio = |count: usize| count as f64 / n_tokens;

    let tags = pos_tag(&doc);
    let words = sentence_words(&doc);
    let flat: Vec<&str> = words.iter().flatten().map(String::as_str).collect();
    let lex = |name: &str| lexicons.require(name);

    let mut v: BTreeMap<&str, f64> = BTreeMap::new();

    // style
    v.insert("quotes", ratio(tokens.iter().filter(|t| t.is_punct() && is_quote(&t.text)).count()));
    v.insert("exclaim", ratio(tokens.iter().filter(|t| t.is_punct() && t.text == "!").count()));
    v.insert("allpunc", ratio(tokens.iter().filter(|t| t.is_punct()).count()));
    v.insert(
        "allcaps",
        doc.word_tokens().filter(|t| t.is_all_caps()).count() as f64 / words_f,
    );
    let stop = lex("stopwords")?;
    v.insert("stops", ratio(flat.iter().filter(|w| stop.contains(w)).count()));
    for (name, group) in CANONICAL_FEATURES {
        if *group == Style && name.chars().next().is_some_and(char::is_uppercase) {
            v.insert(name, ratio(tags.iter().filter(|t| *t == name).count()));
        }
    }

    // complexity
    let distinct: HashSet<&str> = flat.iter().copied().collect();
    v.insert("ttr", distinct.len() as f64 / words_f);
    v.insert("avg_wordlen", doc.letters() as f64 / words_f);
    v.insert("word_count", words_f);
    let mut polysyllables = 0usize;
    for t in doc.word_tokens() {
        let letters = letters_only(&t.text);
        if !letters.is_empty() && count_syllables(&letters)? >= 3 {
            polysyllables += 1;
        }
    }
    let sentences = doc.sentence_count() as f64;
    v.insert(
        "smog_index",
        1.0430 * (polysyllables as f64 * 30.0 / sentences).sqrt() + 3.1291,
    );
    let l = doc.letters() as f64 / words_f * 100.0;
    let s = sentences / words_f * 100.0;
    v.insert("coleman_liau_index", 0.0588 * l - 0.296 * s - 15.8);

    // bias
    for (feature, lexicon) in [
        ("bias_words", "bias_words"),
        ("assertatives", "assertatives"),
        ("hedges", "hedges"),
        ("implicatives", "implicatives"),
        ("report_verbs", "report_verbs"),
        ("positive_opinion_words", "opinion_positive"),
        ("negative_opinion_words", "opinion_negative"),
    ] {
        v.insert(feature, ratio(count_hits(&words, lex(lexicon)?)));
    }

    // affect
    let sent = sentiment_scores(&doc, lex("sentiment")?);
    v.insert("vadneg", sent.neg);
    v.insert("vadneu", sent.neu);
    v.insert("vadpos", sent.pos);
    let subj = lex("subjectivity")?;
    let mut subj_counts: BTreeMap<(Strength, Polarity), usize> = BTreeMap::new();
    for s in &words {
        for hit in subj.hits(s) {
            if let (Some(st), Some(pol)) = (hit.attrs.strength, hit.attrs.polarity) {
                *subj_counts.entry((st, pol)).or_default() += 1;
            }
        }
    }
    let sc = |st, pol| ratio(subj_counts.get(&(st, pol)).copied().unwrap_or(0));
    v.insert("wneg", sc(Strength::Weak, Polarity::Neg));
    v.insert("wpos", sc(Strength::Weak, Polarity::Pos));
    v.insert("wneu", sc(Strength::Weak, Polarity::Neu));
    v.insert("sneg", sc(Strength::Strong, Polarity::Neg));
    v.insert("spos", sc(Strength::Strong, Polarity::Pos));

    // moral
    let moral = lex("moral")?;
    let mut moral_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &words {
        for hit in moral.hits(s) {
            if let Some(cat) = hit.attrs.moral {
                *moral_counts.entry(cat).or_default() += 1;
            }
        }
    }
    for cat in ["IngroupVirtue", "IngroupVice", "AuthorityVice", "PurityVirtue"] {
        v.insert(cat, ratio(moral_counts.get(cat).copied().unwrap_or(0)));
    }

    // event
    v.insert("num_dates", ratio(count_dates(text)));

    let out: Vec<f64> = CANONICAL_FEATURES
        .iter()
        .map(|(name, _)| v.get(name).copied().expect("every schema feature computed"))
        .collect();
    debug_assert!(out.iter().all(|x| x.is_finite()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn feats(text: &str) -> Vec<f64> {
        extract_text_features(text, &LexiconSet::builtin()).unwrap()
    }

    fn get(values: &[f64], name: &str) -> f64 {
        values[FeatureSchema::canonical().index_of(name).unwrap()]
    }

    #[test]
    fn schema_shape() {
        let s = FeatureSchema::canonical();
        assert_eq!(s.len(), 50);
        let unique: HashSet<_> = s.names().iter().collect();
        assert_eq!(unique.len(), 50);
        let count = |g| s.iter().filter(|(_, x)| *x == g).count();
        assert_eq!(
            [Style, Complexity, Bias, Affect, Moral, Event].map(count),
            [25, 5, 7, 8, 4, 1]
        );
    }

    #[test]
    fn ttr_and_word_count() {
        let v = feats("a a a a");
        assert_eq!(get(&v, "ttr"), 0.25);
        assert_eq!(get(&v, "word_count"), 4.0);
    }

    #[test]
    fn coleman_liau_fixture() {
        // L = 18 letters / 6 words * 100 = 300, S = 2 / 6 * 100
        let v = feats("The cat sat. The dog ran.");
        assert_abs_diff_eq!(get(&v, "coleman_liau_index"), -8.026_666_7, epsilon = 1e-6);
    }

    #[test]
    fn smog_fixture() {
        // 30 sentences, 15 of them with one three-syllable word
        let mut text = String::new();
        for i in 0..30 {
            text.push_str(if i % 2 == 0 { "Bob saw a beautiful dog. " } else { "Bob saw a dog. " });
        }
        let v = feats(&text);
        assert_abs_diff_eq!(get(&v, "smog_index"), 1.0430 * 15f64.sqrt() + 3.1291, epsilon = 1e-9);
        assert_abs_diff_eq!(get(&v, "smog_index"), 7.1686, epsilon = 1e-4);
    }

    #[test]
    fn missing_lexicon_is_named() {
        let mut set = LexiconSet::builtin();
        set.remove("hedges");
        let err = extract_text_features("Some text.", &set).unwrap_err();
        assert!(matches!(err, TextError::MissingLexicon(ref n) if n == "hedges"));
    }

    #[test]
    fn punctuation_only_has_no_words() {
        assert!(matches!(
            extract_text_features("?!", &LexiconSet::builtin()),
            Err(TextError::NoWords(_))
        ));
    }

    #[test]
    fn ratio_features_bounded() {
        let v = feats("BREAKING!!! \"They lied,\" officials said on March 3, 2020. It's a total DISASTER, a witch hunt!");
        for (name, x) in FeatureSchema::canonical().names().iter().zip(&v) {
            assert!(x.is_finite(), "{name}");
            if is_ratio_feature(name) {
                assert!((0.0..=1.0).contains(x), "{name} = {x}");
            }
        }
        assert!(get(&v, "num_dates") > 0.0);
        assert!(get(&v, "bias_words") > 0.0);
        assert!(get(&v, "allcaps") > 0.0);
    }
}
