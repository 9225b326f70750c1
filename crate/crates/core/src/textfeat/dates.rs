//! Date-expression detection for the `num_dates` feature.
//!
//! The grammar matches, leftmost-longest and without overlap:
//!
//! - month-day with optional year: `March 5`, `Mar. 5th, 2020`
//! - day-month with optional year: `5 March`, `5th of March 2020`
//! - month-year: `March 2020`
//! - numeric dates: `3/5/2020`, `03/05/20`, `2020-03-05`
//! - a capitalized full month name on its own (`in March`), except `May`
//! - a year from 1900 to 2099
//! - relative expressions: `yesterday`, `today`, `tonight`, `tomorrow`,
//!   weekday names, and `last`/`next`/`this` + `week`/`month`/`year`/weekday
//!
//! Month names must be capitalized so that the modal `may` is not a date.

use std::sync::OnceLock;

use regex::Regex;

const MONTH: &str = r"(?:January|February|March|April|May|June|July|August|September|October|November|December|Jan\.?|Feb\.?|Mar\.?|Apr\.?|Jun\.?|Jul\.?|Aug\.?|Sept?\.?|Oct\.?|Nov\.?|Dec\.?)";
const FULL_MONTH_NOT_MAY: &str =
    r"(?:January|February|March|April|June|July|August|September|October|November|December)";
const WEEKDAY: &str = r"(?i:monday|tuesday|wednesday|thursday|friday|saturday|sunday)";
const YEAR: &str = r"(?:19|20)\d{2}";
const DAY: &str = r"(?:[12]\d|3[01]|0?[1-9])(?:st|nd|rd|th)?";

fn date_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let alternatives = [
            format!(r"{MONTH}\s+{DAY}(?:,?\s+{YEAR})?\b"),
            format!(r"{DAY}\s+(?:of\s+)?{MONTH}(?:,?\s+{YEAR})?\b"),
            format!(r"{MONTH}\s+{YEAR}\b"),
            r"\d{1,2}/\d{1,2}/(?:\d{4}|\d{2})\b".to_string(),
            r"\d{4}-\d{2}-\d{2}\b".to_string(),
            format!(r"{FULL_MONTH_NOT_MAY}\b"),
            format!(r"(?i:last|next|this)\s+(?:(?i:week|month|year|weekend)|{WEEKDAY})\b"),
            format!(r"{WEEKDAY}\b"),
            r"(?i:yesterday|today|tonight|tomorrow)\b".to_string(),
            format!(r"{YEAR}\b"),
        ];
        Regex::new(&format!(r"\b(?:{})", alternatives.join("|"))).expect("date grammar compiles")
    })
}

/// Number of non-overlapping date expressions in `text`.
pub fn count_dates(text: &str) -> usize {
    date_regex().find_iter(text).count()
}

/// The matched date expressions, for inspection.
pub fn find_dates(text: &str) -> Vec<&str> {
    date_regex().find_iter(text).map(|m| m.as_str()).collect()
}
