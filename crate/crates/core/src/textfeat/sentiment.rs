//! Rule-based valence aggregation in the style of VADER.
//!
//! Each word token found in the sentiment lexicon contributes its valence
//! `v`, adjusted by these rules (applied in order):
//!
//! - **Capitals**: if the word is ALL CAPS and the document mixes case,
//!   `v += sign(v) * CAPS_INCR`.
//! - **Degree modifiers**: for each of the three preceding words (same
//!   sentence) that is a booster or dampener, `v += sign(v) * B_INCR * d`
//!   (boosters) or `v -= sign(v) * B_DECR * d` (dampeners), where
//!   `d` is 1.0, 0.95, 0.9 for distance 1, 2, 3. An ALL CAPS modifier in a
//!   mixed-case document adds `CAPS_INCR` to its magnitude.
//! - **Negation**: `v *= N_SCALAR` for each negation word (including any
//!   word ending in `n't`) among the three preceding words.
//!
//! Word valences are summed. Punctuation emphasis adds
//! `min(#'!', 4) * EXCLAIM_INCR`, plus `min(#'?' * QUESTION_INCR, 0.96)`
//! when there is more than one `?`, in the direction of the sum. The
//! compound score is `s / sqrt(s^2 + ALPHA)`, clamped to [-1, 1].
//!
//! Proportions: positive words contribute `v + 1`, negative words
//! `|v| + 1`, and every other word token contributes 1 to the neutral
//! mass. The punctuation emphasis is added to the dominant side. The three
//! masses are normalised to sum to 1.

use super::lexicon::Lexicon;
use super::tokenize::TokenizedDoc;

pub const B_INCR: f64 = 0.293;
pub const B_DECR: f64 = 0.293;
pub const CAPS_INCR: f64 = 0.733;
pub const N_SCALAR: f64 = -0.74;
pub const EXCLAIM_INCR: f64 = 0.292;
pub const QUESTION_INCR: f64 = 0.18;
pub const ALPHA: f64 = 15.0;

const DISTANCE_DAMPING: [f64; 3] = [1.0, 0.95, 0.9];

const BOOSTERS: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerably", "decidedly", "deeply",
    "enormously", "entirely", "especially", "exceptionally", "extremely", "fabulously",
    "greatly", "highly", "hugely", "incredibly", "intensely", "majorly", "more", "most",
    "particularly", "purely", "quite", "really", "remarkably", "so", "substantially",
    "thoroughly", "totally", "tremendously", "uber", "unbelievably", "unusually", "utterly",
    "very",
];

const DAMPENERS: &[&str] = &[
    "almost", "barely", "hardly", "less", "little", "marginally", "occasionally", "partly",
    "scarcely", "slightly", "somewhat",
];

const NEGATIONS: &[&str] = &[
    "not", "no", "never", "none", "nobody", "nothing", "neither", "nor", "nowhere", "cannot",
    "without", "aint", "dont", "doesnt", "didnt", "isnt", "wasnt", "wont", "cant",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentimentScores {
    pub neg: f64,
    pub neu: f64,
    pub pos: f64,
    pub compound: f64,
}

impl SentimentScores {
    pub const NEUTRAL: SentimentScores = SentimentScores {
        neg: 0.0,
        neu: 1.0,
        pos: 0.0,
        compound: 0.0,
    };
}

fn is_negation(w: &str) -> bool {
    NEGATIONS.contains(&w) || w.ends_with("n't") || w.ends_with("n\u{2019}t")
}

pub fn sentiment_scores(doc: &TokenizedDoc, lexicon: &Lexicon) -> SentimentScores {
    let all_words: Vec<_> = doc.word_tokens().collect();
    let caps = all_words.iter().filter(|t| t.is_all_caps()).count();
    let mixed_case = caps > 0 && caps < all_words.len();

    let mut valences = Vec::new();
    let mut neutral = 0.0;
    for sentence in doc.sentences() {
        let words: Vec<_> = sentence.iter().filter(|t| t.is_word()).collect();
        let lowers: Vec<String> = words.iter().map(|t| t.lower()).collect();
        for (i, tok) in words.iter().enumerate() {
            let lw = &lowers[i];
            let base = lexicon.get(lw).and_then(|a| a.valence).unwrap_or(0.0);
            if base == 0.0 {
                neutral += 1.0;
                continue;
            }
            let sign = base.signum();
            let mut v = base;
            if mixed_case && tok.is_all_caps() {
                v += sign * CAPS_INCR;
            }
            for (dist, damp) in DISTANCE_DAMPING.iter().enumerate() {
                let Some(j) = i.checked_sub(dist + 1) else { break };
                let w = lowers[j].as_str();
                let caps_boost = if mixed_case && words[j].is_all_caps() { CAPS_INCR } else { 0.0 };
                if BOOSTERS.contains(&w) {
                    v += sign * (B_INCR + caps_boost) * damp;
                } else if DAMPENERS.contains(&w) {
                    v -= sign * (B_DECR + caps_boost) * damp;
                }
            }
            for dist in 1..=3 {
                let Some(j) = i.checked_sub(dist) else { break };
                if is_negation(&lowers[j]) {
                    v *= N_SCALAR;
                }
            }
            valences.push(v);
        }
    }
    if valences.is_empty() {
        return SentimentScores::NEUTRAL;
    }

    let exclaims = doc.tokens().iter().filter(|t| t.is_punct() && t.text == "!").count();
    let questions = doc.tokens().iter().filter(|t| t.is_punct() && t.text == "?").count();
    let mut emphasis = exclaims.min(4) as f64 * EXCLAIM_INCR;
    if questions > 1 {
        emphasis += (questions as f64 * QUESTION_INCR).min(0.96);
    }

    let sum: f64 = valences.iter().sum();
    let total = sum + sum.signum() * emphasis;
    let compound = (total / (total * total + ALPHA).sqrt()).clamp(-1.0, 1.0);

    let mut pos: f64 = valences.iter().filter(|v| **v > 0.0).map(|v| v + 1.0).sum();
    let mut neg: f64 = valences.iter().filter(|v| **v < 0.0).map(|v| -v + 1.0).sum();
    if pos > neg {
        pos += emphasis;
    } else if neg > pos {
        neg += emphasis;
    }
    let mass = pos + neg + neutral;
    SentimentScores {
        neg: neg / mass,
        neu: neutral / mass,
        pos: pos / mass,
        compound,
    }
}
