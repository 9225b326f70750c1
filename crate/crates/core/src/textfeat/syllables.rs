//! Heuristic English syllable counter.
//!
//! The count starts as the number of vowel groups, where the vowels are
//! `a e i o u y` and a word-initial `y` counts as a consonant. It is then
//! adjusted, in this order:
//!
//! 1. Final `e` is silent (`make`), except after a consonant in `-le`
//!    (`table`), or when it is the only vowel group (`the`, `be`).
//! 2. Final `-ed` is silent unless preceded by `t` or `d` (`jumped` vs
//!    `wanted`), and only when another vowel group remains.
//! 3. Final `-es` is silent unless preceded by `s`, `x`, `z`, `ch`, `sh`,
//!    `ce` or `ge` (`makes` vs `boxes`), and only when another vowel group
//!    remains.
//! 4. Each `ia` not preceded by `c`, `t`, `s` or `g` adds one (`media`,
//!    `giant`), since it spans two syllables but forms one vowel group.
//! 5. Each `ua` not preceded by `q` or `g` adds one (`actual`).
//!
//! The result is at least 1.

use super::TextError;

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}

fn vowel_groups(w: &[u8]) -> usize {
    let mut groups = 0;
    let mut prev_vowel = false;
    for (i, &c) in w.iter().enumerate() {
        let v = is_vowel(c) && !(i == 0 && c == b'y');
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    groups
}

pub fn count_syllables(word: &str) -> Result<usize, TextError> {
    if word.is_empty() || !word.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(TextError::NonAlphabetic(word.to_string()));
    }
    let lw = word.to_ascii_lowercase();
    let w = lw.as_bytes();
    let n = w.len();
    let mut count = vowel_groups(w) as isize;

    let ends = |s: &str| lw.ends_with(s);
    let before = |k: usize| if n > k { Some(w[n - 1 - k]) } else { None };

    if ends("e") && !ends("ee") && !ends("ye") {
        let le_exception = ends("le") && before(2).is_some_and(|c| !is_vowel(c));
        if !le_exception && count > 1 && before(1).is_some_and(|c| !is_vowel(c)) {
            count -= 1;
        }
    } else if ends("ed") && count > 1 && !ends("eed") {
        if !matches!(before(2), Some(b't') | Some(b'd')) {
            count -= 1;
        }
    } else if ends("es") && count > 1 && !ends("ees") {
        let sibilant = matches!(before(2), Some(b's') | Some(b'x') | Some(b'z'))
            || ends("ches")
            || ends("shes")
            || ends("ces")
            || ends("ges");
        if !sibilant {
            count -= 1;
        }
    }

    for i in 1..n {
        if w[i - 1] == b'i' && w[i] == b'a' && (i < 2 || !matches!(w[i - 2], b'c' | b't' | b's' | b'g')) {
            count += 1;
        }
        if w[i - 1] == b'u' && w[i] == b'a' && (i < 2 || !matches!(w[i - 2], b'q' | b'g')) {
            count += 1;
        }
    }
    Ok(count.max(1) as usize)
}
