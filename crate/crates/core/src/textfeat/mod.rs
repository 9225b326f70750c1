//! Content-feature extraction: tokenization, POS tagging, readability,
//! lexicon hits, sentiment, and date expressions, assembled into a fixed
//! 50-feature schema.

pub mod dates;
pub mod features;
pub mod lexicon;
pub mod matrix;
pub mod pos;
pub mod sentiment;
pub mod syllables;
pub mod tokenize;

use std::path::PathBuf;

pub use features::{
    extract_features, extract_text_features, moral_scores, FeatureGroup, FeatureSchema,
    FeatureVector, CANONICAL_FEATURES,
};
pub use lexicon::{Lexicon, LexiconSet, Polarity, Strength, MORAL_CATEGORIES, REQUIRED_LEXICONS};
pub use matrix::{FeatureMatrix, FeatureRow};
pub use pos::{pos_tag, Tag, PENN_TAGS};
pub use sentiment::{sentiment_scores, SentimentScores};
pub use syllables::count_syllables;
pub use tokenize::{tokenize, Token, TokenKind, TokenizedDoc};

#[derive(Debug, thiserror::Error)]
pub enum TextError {
    #[error("text is empty")]
    EmptyText,
    #[error("text of article {0:?} contains no words")]
    NoWords(String),
    #[error("syllable counting needs an alphabetic word, got {0:?}")]
    NonAlphabetic(String),
    #[error("required lexicon {0:?} is missing")]
    MissingLexicon(String),
    #[error("lexicon {0:?} has no entries")]
    EmptyLexicon(String),
    #[error("{source_name}:{line}: {message}")]
    LexiconParse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("feature matrix: {0}")]
    Matrix(String),
}
