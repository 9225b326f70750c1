//! Cleanup of raw model output.
//!
//! Removes leading labels (`Title:`, `Headline:`, `Body:` ...), markdown
//! headers and emphasis, quotes wrapping the whole text, and sentences
//! matching the bundled disclaimer patterns. Steps repeat until nothing
//! changes, which makes the function idempotent.

use std::sync::OnceLock;

use regex::Regex;

fn label_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^\s*(?:title|headline|body|article|text|content|story|news article|rewritten article|reworded headline)\s*[:：]\s*").unwrap()
    })
}

fn header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*#{1,6}\s*").unwrap())
}

pub fn disclaimer_patterns() -> &'static Vec<Regex> {
    static RE: OnceLock<Vec<Regex>> = OnceLock::new();
    RE.get_or_init(|| {
        include_str!("../../data/sanitize_patterns.txt")
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(|l| Regex::new(l).expect("bundled sanitize pattern compiles"))
            .collect()
    })
}

/// Splits a line into sentences, keeping terminal punctuation and any
/// closing quote with the sentence.
fn sentences(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (_, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?' | '"' | '\'' | '”' | '’' | ')') {
                j += 1;
            }
            if j == chars.len() || chars[j].1.is_whitespace() {
                let end = if j == chars.len() { line.len() } else { chars[j].0 };
                out.push(line[start..end].trim());
                start = end;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    if start < line.len() && !line[start..].trim().is_empty() {
        out.push(line[start..].trim());
    }
    out.retain(|s| !s.is_empty());
    out
}

/// Whether `text` contains a sentence matching a disclaimer pattern.
pub fn contains_disclaimer(text: &str) -> bool {
    text.lines()
        .flat_map(sentences)
        .any(|s| disclaimer_patterns().iter().any(|re| re.is_match(s)))
}

fn strip_wrapping_quotes(s: &str) -> &str {
    let t = s.trim();
    for (open, close) in [('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’'), ('«', '»')] {
        if t.len() >= 2 && t.starts_with(open) && t.ends_with(close) {
            let inner = &t[open.len_utf8()..t.len() - close.len_utf8()];
            // leave text like `"a" and "b"` alone
            if !inner.contains(open) && !inner.contains(close) {
                return inner.trim();
            }
        }
    }
    t
}

fn pass(raw: &str) -> String {
    let text = raw.replace("\r\n", "\n").replace('\r', "\n");
    let mut lines: Vec<String> = Vec::new();
    for line in text.lines() {
        let was_blank = line.trim().is_empty();
        let mut l = header_re().replace(line, "").into_owned();
        l = l.replace("**", "").replace("__", "");
        l = label_re().replace(&l, "").into_owned();
        let kept: Vec<&str> = sentences(&l)
            .into_iter()
            .filter(|s| !disclaimer_patterns().iter().any(|re| re.is_match(s)))
            .collect();
        let joined = kept.join(" ");
        let cleaned = strip_wrapping_quotes(&joined).to_string();
        if cleaned.is_empty() && !was_blank {
            continue;
        }
        lines.push(cleaned);
    }
    // collapse blank runs and trim blank edges
    let mut out: Vec<String> = Vec::new();
    for l in lines {
        if l.is_empty() && out.last().is_none_or(|p: &String| p.is_empty()) {
            continue;
        }
        out.push(l);
    }
    while out.last().is_some_and(|l| l.is_empty()) {
        out.pop();
    }
    strip_wrapping_quotes(&out.join("\n")).to_string()
}

pub fn sanitize(raw: &str) -> String {
    let mut cur = pass(raw);
    for _ in 0..16 {
        let next = pass(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_labels_and_headers() {
        assert_eq!(sanitize("Title: X"), "X");
        assert_eq!(sanitize("## Headline: Big Story"), "Big Story");
        assert_eq!(sanitize("\"Quoted headline\""), "Quoted headline");
        assert_eq!(sanitize("**Body:** The mayor spoke."), "The mayor spoke.");
    }

    #[test]
    fn clean_text_unchanged() {
        let clean = "The council met on Tuesday. It approved the budget.\n\nResidents were not consulted.";
        assert_eq!(sanitize(clean), clean);
        assert_eq!(sanitize("\"Yes,\" she said. \"We will.\""), "\"Yes,\" she said. \"We will.\"");
    }

    #[test]
    fn removes_disclaimers() {
        let raw = "Sure! Here is the rewritten article:\n\nThe river flooded. As an AI, I cannot verify this.\n\nNote: this story is fictional.";
        let out = sanitize(raw);
        assert_eq!(out, "The river flooded.");
        assert!(!contains_disclaimer(&out));
    }

    #[test]
    fn sentence_split() {
        assert_eq!(sentences("A b. C d! \"E?\" f"), vec!["A b.", "C d!", "\"E?\"", "f"]);
        assert_eq!(sentences("Pi is 3.14 today."), vec!["Pi is 3.14 today."]);
    }
}
