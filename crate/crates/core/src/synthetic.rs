//! Seeded generator of labelled toy corpora with controllable bias.
//!
//! Articles are assembled from short newsroom sentences. Fake articles
//! lean on loaded, hedged wording and real ones on attributed reporting,
//! at rates that overlap so the label is only weakly recoverable from
//! content. Machine-written articles (MF, MR) additionally carry
//! stylistic markers: exclamations, all-caps words, explicit dates and
//! quoted fragments. That marker is the shortcut a biased detector learns.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Article, Corpus, CorpusError, Label, Source, Subgroup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub hr: usize,
    pub hf: usize,
    pub mf: usize,
    pub mr: usize,
    pub seed: u64,
    /// Per-sentence chance of a loaded clause in fake articles.
    pub fake_cue_rate: f64,
    /// Per-sentence chance of an attributed clause in real articles.
    pub real_cue_rate: f64,
    /// Chance of either clause in articles of the other label.
    pub cross_cue_rate: f64,
    /// Per-sentence marker chance in machine-written articles.
    pub marker_rate: f64,
    /// Per-sentence marker chance in human-written articles.
    pub human_marker_rate: f64,
    pub min_sentences: usize,
    pub max_sentences: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            hr: 800,
            hf: 400,
            mf: 400,
            mr: 400,
            seed: 0,
            fake_cue_rate: 0.2,
            real_cue_rate: 0.2,
            cross_cue_rate: 0.1,
            marker_rate: 0.5,
            human_marker_rate: 0.03,
            min_sentences: 8,
            max_sentences: 16,
        }
    }
}

impl SyntheticSpec {
    pub fn count(&self, g: Subgroup) -> usize {
        match g {
            Subgroup::HR => self.hr,
            Subgroup::HF => self.hf,
            Subgroup::MF => self.mf,
            Subgroup::MR => self.mr,
        }
    }
}

const SUBJECTS: &[&str] = &[
    "The council", "Local officials", "The company", "Residents", "The committee", "State lawmakers",
    "The school board", "Police", "The agency", "Researchers", "The mayor", "Hospital staff",
];
const VERBS: &[&str] = &[
    "approved", "reviewed", "discussed", "delayed", "rejected", "funded", "examined", "proposed", "updated",
];
const OBJECTS: &[&str] = &[
    "the new budget", "a housing plan", "the road project", "a water policy", "the annual report",
    "a tax proposal", "the park renovation", "a transit study", "the hiring freeze", "a safety review",
];
const TAILS: &[&str] = &[
    "on the east side", "after a long meeting", "for the coming year", "in the downtown area",
    "during the session", "with little debate", "before the deadline", "at the request of residents",
];
const FAKE_CUES: &[&str] = &[
    "Critics say the deal was a corrupt disaster",
    "Insiders allegedly believe the vote was rigged",
    "Some claim officials apparently lied about the cost",
    "Opponents call the plan an absurd scandal",
    "It is supposedly a shocking betrayal of voters",
    "Many fear a devastating crisis is being hidden",
];
const REAL_CUES: &[&str] = &[
    "A spokesperson confirmed the schedule",
    "Officials said the figures were published",
    "The report noted the estimated cost",
    "The department announced the results",
    "Records show the measure passed",
    "Staff explained the process to reporters",
];
const CAPS: &[&str] = &["BREAKING", "HUGE", "URGENT", "EXCLUSIVE", "MASSIVE"];
const MONTHS: &[&str] = &[
    "January", "February", "March", "April", "June", "July", "August", "September", "October", "November",
];

fn base_sentence(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{} {} {} {}",
        SUBJECTS.choose(rng).unwrap(),
        VERBS.choose(rng).unwrap(),
        OBJECTS.choose(rng).unwrap(),
        TAILS.choose(rng).unwrap()
    )
}

/// Rewrites a sentence body (no final punctuation) with one machine marker.
fn add_marker(s: String, rng: &mut ChaCha8Rng) -> (String, &'static str) {
    match rng.random_range(0..4) {
        0 => (s, "!"),
        1 => (format!("{} {s}", CAPS.choose(rng).unwrap()), "."),
        2 => (
            format!("{s} on {} {}, {}", MONTHS.choose(rng).unwrap(), rng.random_range(1..29), rng.random_range(2015..2024)),
            ".",
        ),
        _ => (format!("\"{s}\""), ""),
    }
}

fn article_text(label: Label, machine: bool, spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> String {
    let (own_rate, own, other) = match label {
        Label::Fake => (spec.fake_cue_rate, FAKE_CUES, REAL_CUES),
        Label::Real => (spec.real_cue_rate, REAL_CUES, FAKE_CUES),
    };
    let marker_rate = if machine { spec.marker_rate } else { spec.human_marker_rate };
    let n = rng.random_range(spec.min_sentences..=spec.max_sentences);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut s = base_sentence(rng);
        if rng.random_bool(own_rate) {
            s = format!("{}, and {}", own.choose(rng).unwrap(), lower_first(&s));
        } else if rng.random_bool(spec.cross_cue_rate) {
            s = format!("{}, and {}", other.choose(rng).unwrap(), lower_first(&s));
        }
        let (s, end) = if rng.random_bool(marker_rate) { add_marker(s, rng) } else { (s, ".") };
        let s = if end.is_empty() { format!("{}.", s.trim_end_matches('"')) + "\"" } else { s + end };
        out.push(s);
    }
    out.join(" ")
}

fn lower_first(s: &str) -> String {
    // keep proper nouns like "Police" readable; only lowercase articles
    match s.strip_prefix("The ") {
        Some(rest) => format!("the {rest}"),
        None => s.to_string(),
    }
}

fn title(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{} {} {}",
        SUBJECTS.choose(rng).unwrap(),
        VERBS.choose(rng).unwrap(),
        OBJECTS.choose(rng).unwrap()
    )
}

/// Builds the corpus. Machine articles link to a random human seed of the
/// same label through `origin_id` (when one exists).
pub fn synthetic_corpus(spec: &SyntheticSpec, name: &str) -> Result<Corpus, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut articles = Vec::with_capacity(spec.hr + spec.hf + spec.mf + spec.mr);
    for g in Subgroup::ALL {
        let prefix = g.as_str().to_lowercase();
        let seeds = match g {
            Subgroup::MF => spec.hf,
            Subgroup::MR => spec.hr,
            _ => 0,
        };
        let seed_prefix = if g == Subgroup::MF { "hf" } else { "hr" };
        for i in 0..spec.count(g) {
            let machine = g.source() == Source::Machine;
            let text = article_text(g.label(), machine, spec, &mut rng);
            let origin_id = (machine && seeds > 0).then(|| format!("{seed_prefix}-{:05}", rng.random_range(0..seeds)));
            articles.push(Article {
                id: format!("{prefix}-{i:05}"),
                title: title(&mut rng),
                text,
                label: g.label(),
                source: g.source(),
                origin_id,
            });
        }
    }
    Corpus::new(name, articles)
}
