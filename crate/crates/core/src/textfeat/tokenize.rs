//! Word/punctuation tokenizer and rule-based sentence splitter.
//!
//! Token rules:
//! - A word token is a maximal run of alphanumeric characters. An apostrophe
//!   (`'` or `’`) stays inside the token when it sits between a letter and an
//!   alphanumeric character (`don't`, `O'Neil`, `Trump's`).
//! - Inside a token that starts with a digit, `.` and `,` followed by a digit
//!   stay inside (`3.5`, `1,000`).
//! - Tokens containing at least one letter are words; the rest of the
//!   alphanumeric tokens are numbers.
//! - Every other non-whitespace character is its own punctuation token.
//!
//! Sentence rules:
//! - `.`, `!` and `?` are terminators. A run of terminators, optionally
//!   followed by closing quotes or brackets, ends a sentence when it is the
//!   end of the text, or when whitespace follows and the next token (after
//!   any opening quotes or brackets) starts with an uppercase letter or a
//!   digit.
//! - A `.` written directly after one of [`ABBREVIATIONS`] or after a single
//!   letter (initials such as `J.` or the pieces of `U.S.`) never ends a
//!   sentence. `Dr. Smith won.` is therefore one sentence, and so is
//!   `He moved to the U.S. Then he left.`

use std::ops::Range;

use super::TextError;

/// Lowercased words whose trailing period is not a sentence boundary.
pub const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "ft", "gen", "gov", "sen", "rep",
    "rev", "lt", "col", "capt", "sgt", "cmdr", "adm", "hon", "pres", "inc", "ltd", "co", "corp",
    "bros", "vs", "etc", "approx", "dept", "univ", "assn", "est", "no", "fig", "vol", "jan",
    "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    /// Whitespace (or start of text) precedes this token.
    pub space_before: bool,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }

    pub fn is_punct(&self) -> bool {
        self.kind == TokenKind::Punct
    }

    pub fn lower(&self) -> String {
        self.text.to_lowercase()
    }

    /// At least two letters, all uppercase.
    pub fn is_all_caps(&self) -> bool {
        let mut letters = 0;
        for c in self.text.chars().filter(|c| c.is_alphabetic()) {
            if !c.is_uppercase() {
                return false;
            }
            letters += 1;
        }
        letters >= 2
    }

    fn starts_upper_or_digit(&self) -> bool {
        self.text
            .chars()
            .next()
            .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedDoc {
    tokens: Vec<Token>,
    sentences: Vec<Range<usize>>,
    letters: usize,
    words: usize,
}

impl TokenizedDoc {
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn sentences(&self) -> impl Iterator<Item = &[Token]> + '_ {
        self.sentences.iter().map(|r| &self.tokens[r.clone()])
    }

    pub fn sentence_ranges(&self) -> &[Range<usize>] {
        &self.sentences
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    /// Letters inside word tokens.
    pub fn letters(&self) -> usize {
        self.letters
    }

    /// Number of word tokens.
    pub fn words(&self) -> usize {
        self.words
    }

    pub fn word_tokens(&self) -> impl Iterator<Item = &Token> + '_ {
        self.tokens.iter().filter(|t| t.is_word())
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_terminator(t: &Token) -> bool {
    t.is_punct() && matches!(t.text.as_str(), "." | "!" | "?")
}

fn is_closer(t: &Token) -> bool {
    t.is_punct()
        && matches!(
            t.text.as_str(),
            "\"" | "'" | "\u{201D}" | "\u{2019}" | ")" | "]" | "}"
        )
}

fn is_opener(t: &Token) -> bool {
    t.is_punct()
        && matches!(
            t.text.as_str(),
            "\"" | "'" | "\u{201C}" | "\u{2018}" | "(" | "[" | "{"
        )
}

fn scan(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut space_before = true;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            space_before = true;
            i += 1;
            continue;
        }
        if c.is_alphanumeric() {
            let numeric_start = c.is_ascii_digit();
            let start = i;
            i += 1;
            while i < chars.len() {
                let c = chars[i];
                let next_alnum = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
                let next_digit = chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
                if c.is_alphanumeric()
                    || (is_apostrophe(c) && next_alnum && chars[i - 1].is_alphabetic())
                    || (numeric_start
                        && (c == '.' || c == ',')
                        && next_digit
                        && chars[i - 1].is_ascii_digit())
                {
                    i += 1;
                } else {
                    break;
                }
            }
            let word: String = chars[start..i].iter().collect();
            let kind = if word.chars().any(char::is_alphabetic) {
                TokenKind::Word
            } else {
                TokenKind::Number
            };
            tokens.push(Token {
                text: word,
                kind,
                space_before,
            });
        } else {
            tokens.push(Token {
                text: c.to_string(),
                kind: TokenKind::Punct,
                space_before,
            });
            i += 1;
        }
        space_before = false;
    }
    tokens
}

fn suppresses_boundary(tokens: &[Token], period: usize) -> bool {
    if period == 0 || tokens[period].text != "." || tokens[period].space_before {
        return false;
    }
    let prev = &tokens[period - 1];
    if !prev.is_word() {
        return false;
    }
    let lower = prev.lower();
    lower.chars().count() == 1 || ABBREVIATIONS.contains(&lower.as_str())
}

fn split_sentences(tokens: &[Token]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < tokens.len() {
        if !is_terminator(&tokens[i]) || suppresses_boundary(tokens, i) {
            i += 1;
            continue;
        }
        let mut end = i + 1;
        while end < tokens.len() && is_terminator(&tokens[end]) && !tokens[end].space_before {
            end += 1;
        }
        while end < tokens.len() && is_closer(&tokens[end]) && !tokens[end].space_before {
            end += 1;
        }
        let boundary = if end == tokens.len() {
            true
        } else if tokens[end].space_before {
            let mut j = end;
            while j < tokens.len() && is_opener(&tokens[j]) {
                j += 1;
            }
            j < tokens.len() && tokens[j].starts_upper_or_digit()
        } else {
            false
        };
        if boundary {
            out.push(start..end);
            start = end;
        }
        i = end;
    }
    if start < tokens.len() {
        out.push(start..tokens.len());
    }
    out
}

pub fn tokenize(text: &str) -> Result<TokenizedDoc, TextError> {
    let tokens = scan(text);
    if tokens.is_empty() {
        return Err(TextError::EmptyText);
    }
    let sentences = split_sentences(&tokens);
    let mut letters = 0;
    let mut words = 0;
    for t in tokens.iter().filter(|t| t.is_word()) {
        words += 1;
        letters += t.text.chars().filter(|c| c.is_alphabetic()).count();
    }
    Ok(TokenizedDoc {
        tokens,
        sentences,
        letters,
        words,
    })
}
