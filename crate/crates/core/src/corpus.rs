//! News article data model, JSON Lines ingestion, splitting and augmentation.
//!
//! Every article falls into exactly one of four subgroups determined by its
//! veracity label and authorship source:
//!
//! | subgroup | label | source  |
//! |----------|-------|---------|
//! | HR       | real  | human   |
//! | HF       | fake  | human   |
//! | MF       | fake  | machine |
//! | MR       | real  | machine |

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate article ids: {}", .0.join(", "))]
    DuplicateIds(Vec<String>),
    #[error("articles with empty id")]
    EmptyId,
    #[error("articles with empty title or text: {}", .0.join(", "))]
    EmptyContent(Vec<String>),
    #[error("origin_id of {article} refers to {origin}, which is not human-written")]
    BadOrigin { article: String, origin: String },
    #[error("unresolved origin ids: {}", .0.join(", "))]
    UnresolvedOrigins(Vec<String>),
    #[error("id collision between corpora: {}", .0.join(", "))]
    IdCollision(Vec<String>),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("cannot split an empty corpus")]
    EmptyCorpus,
    #[error("subgroup {subgroup} has {count} article(s); stratified splitting needs at least 2")]
    SubgroupTooSmall { subgroup: Subgroup, count: usize },
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

/// Veracity label; fake is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::Real => 0,
            Label::Fake => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Label::Real),
            1 => Some(Label::Fake),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Human,
    Machine,
}

/// The four article populations. Ordering follows the report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subgroup {
    HR,
    HF,
    MF,
    MR,
}

impl Subgroup {
    pub const ALL: [Subgroup; 4] = [Subgroup::HR, Subgroup::HF, Subgroup::MF, Subgroup::MR];

    pub fn of(label: Label, source: Source) -> Self {
        match (label, source) {
            (Label::Real, Source::Human) => Subgroup::HR,
            (Label::Fake, Source::Human) => Subgroup::HF,
            (Label::Fake, Source::Machine) => Subgroup::MF,
            (Label::Real, Source::Machine) => Subgroup::MR,
        }
    }

    pub fn label(self) -> Label {
        match self {
            Subgroup::HR | Subgroup::MR => Label::Real,
            Subgroup::HF | Subgroup::MF => Label::Fake,
        }
    }

    pub fn source(self) -> Source {
        match self {
            Subgroup::HR | Subgroup::HF => Source::Human,
            Subgroup::MF | Subgroup::MR => Source::Machine,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Subgroup::HR => "HR",
            Subgroup::HF => "HF",
            Subgroup::MF => "MF",
            Subgroup::MR => "MR",
        }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subgroup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "HR" => Ok(Subgroup::HR),
            "HF" => Ok(Subgroup::HF),
            "MF" => Ok(Subgroup::MF),
            "MR" => Ok(Subgroup::MR),
            other => Err(format!("unknown subgroup {other:?}")),
        }
    }
}

/// One news item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    pub text: String,
    pub label: Label,
    pub source: Source,
    /// Seed article this item was generated from, for machine-written items.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_id: Option<String>,
}

impl Article {
    pub fn subgroup(&self) -> Subgroup {
        Subgroup::of(self.label, self.source)
    }
}

/// A validated, immutable collection of articles with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    name: String,
    articles: Vec<Article>,
}

impl Corpus {
    /// Validates every article and corpus invariant.
    ///
    /// An `origin_id` pointing at an article inside this corpus must point at
    /// a human-written one. Origins that live in another corpus cannot be
    /// checked here; use [`Corpus::check_origins`] against the seed corpus.
    pub fn new(name: impl Into<String>, articles: Vec<Article>) -> Result<Self> {
        if articles.iter().any(|a| a.id.trim().is_empty()) {
            return Err(CorpusError::EmptyId);
        }
        let mut seen = HashMap::with_capacity(articles.len());
        let mut dups = BTreeSet::new();
        for (i, a) in articles.iter().enumerate() {
            if seen.insert(a.id.as_str(), i).is_some() {
                dups.insert(a.id.clone());
            }
        }
        if !dups.is_empty() {
            return Err(CorpusError::DuplicateIds(dups.into_iter().collect()));
        }
        let empty: Vec<String> = articles
            .iter()
            .filter(|a| a.title.trim().is_empty() || a.text.trim().is_empty())
            .map(|a| a.id.clone())
            .collect();
        if !empty.is_empty() {
            return Err(CorpusError::EmptyContent(empty));
        }
        for a in &articles {
            if let Some(origin) = &a.origin_id {
                if let Some(&j) = seen.get(origin.as_str()) {
                    if articles[j].source != Source::Human {
                        return Err(CorpusError::BadOrigin {
                            article: a.id.clone(),
                            origin: origin.clone(),
                        });
                    }
                }
            }
        }
        Ok(Self {
            name: name.into(),
            articles,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            articles: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Article> {
        self.articles.iter().find(|a| a.id == id)
    }

    pub fn into_articles(self) -> Vec<Article> {
        self.articles
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Checks that every `origin_id` resolves to a human-written article in `seeds`.
    pub fn check_origins(&self, seeds: &Corpus) -> Result<()> {
        let index: HashMap<&str, &Article> =
            seeds.articles.iter().map(|a| (a.id.as_str(), a)).collect();
        let mut unresolved = Vec::new();
        for a in &self.articles {
            if let Some(origin) = &a.origin_id {
                match index.get(origin.as_str()) {
                    Some(seed) if seed.source == Source::Human => {}
                    Some(_) => {
                        return Err(CorpusError::BadOrigin {
                            article: a.id.clone(),
                            origin: origin.clone(),
                        })
                    }
                    None => unresolved.push(a.id.clone()),
                }
            }
        }
        if unresolved.is_empty() {
            Ok(())
        } else {
            Err(CorpusError::UnresolvedOrigins(unresolved))
        }
    }

    pub fn subgroup_counts(&self) -> SubgroupCounts {
        subgroup_counts(self)
    }
}

/// Article counts for all four subgroups; absent subgroups count zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SubgroupCounts {
    #[serde(rename = "HR")]
    pub hr: usize,
    #[serde(rename = "HF")]
    pub hf: usize,
    #[serde(rename = "MF")]
    pub mf: usize,
    #[serde(rename = "MR")]
    pub mr: usize,
}

impl SubgroupCounts {
    pub fn get(&self, g: Subgroup) -> usize {
        match g {
            Subgroup::HR => self.hr,
            Subgroup::HF => self.hf,
            Subgroup::MF => self.mf,
            Subgroup::MR => self.mr,
        }
    }

    fn slot(&mut self, g: Subgroup) -> &mut usize {
        match g {
            Subgroup::HR => &mut self.hr,
            Subgroup::HF => &mut self.hf,
            Subgroup::MF => &mut self.mf,
            Subgroup::MR => &mut self.mr,
        }
    }

    pub fn total(&self) -> usize {
        self.hr + self.hf + self.mf + self.mr
    }

    pub fn as_map(&self) -> BTreeMap<Subgroup, usize> {
        Subgroup::ALL.iter().map(|&g| (g, self.get(g))).collect()
    }
}

pub fn subgroup_counts(corpus: &Corpus) -> SubgroupCounts {
    let mut counts = SubgroupCounts::default();
    for a in &corpus.articles {
        *counts.slot(a.subgroup()) += 1;
    }
    counts
}

/// Reads a JSON Lines corpus. Blank lines and lines starting with `#` are
/// skipped; line numbers are 1-based.
pub fn load_corpus(path: impl AsRef<Path>, name: &str) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_corpus(BufReader::new(file), name).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::Io {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

pub fn read_corpus(reader: impl BufRead, name: &str) -> Result<Corpus> {
    let mut articles = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: name.to_string(),
            source,
        })?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let article: Article = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        articles.push(article);
    }
    Corpus::new(name, articles)
}

pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    write_corpus_with(corpus, path, None)
}

/// Writes JSON Lines, optionally preceded by a `# <provenance>` line.
pub fn write_corpus_with(corpus: &Corpus, path: impl AsRef<Path>, provenance: Option<&str>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    if let Some(p) = provenance {
        writeln!(w, "# {p}").map_err(io_err)?;
    }
    for a in &corpus.articles {
        let line = serde_json::to_string(a).expect("article serializes");
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratify_by_subgroup: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
            stratify_by_subgroup: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(CorpusError::InvalidSplit(format!(
                "train_fraction must lie in (0,1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Train size for a block of `n` articles: nearest integer to `n * fraction`,
/// clamped so both sides keep at least one article when `n >= 2`.
fn train_size(n: usize, fraction: f64) -> usize {
    let target = (n as f64 * fraction).round() as usize;
    if n >= 2 {
        target.clamp(1, n - 1)
    } else {
        target.min(n)
    }
}

/// Seeded random partition into `(train, test)`.
///
/// Both outputs keep the input article order. With stratification each
/// subgroup is shuffled and cut independently, subgroups processed in
/// HR, HF, MF, MR order from a single seeded stream.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    spec.validate()?;
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut in_train = vec![false; corpus.len()];

    let blocks: Vec<Vec<usize>> = if spec.stratify_by_subgroup {
        let mut by_group: BTreeMap<Subgroup, Vec<usize>> = BTreeMap::new();
        for (i, a) in corpus.articles.iter().enumerate() {
            by_group.entry(a.subgroup()).or_default().push(i);
        }
        for (&g, idx) in &by_group {
            if idx.len() < 2 {
                return Err(CorpusError::SubgroupTooSmall {
                    subgroup: g,
                    count: idx.len(),
                });
            }
        }
        by_group.into_values().collect()
    } else {
        vec![(0..corpus.len()).collect()]
    };

    for mut block in blocks {
        let n_train = train_size(block.len(), spec.train_fraction);
        block.shuffle(&mut rng);
        for &i in &block[..n_train] {
            in_train[i] = true;
        }
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (a, &t) in corpus.articles.iter().zip(&in_train) {
        if t {
            train.push(a.clone());
        } else {
            test.push(a.clone());
        }
    }
    Ok((
        Corpus {
            name: format!("{}-train", corpus.name),
            articles: train,
        },
        Corpus {
            name: format!("{}-test", corpus.name),
            articles: test,
        },
    ))
}

/// Appends `extra` to `base`. The result keeps `base`'s name.
pub fn augment(base: &Corpus, extra: &Corpus) -> Result<Corpus> {
    let ids: BTreeSet<&str> = base.articles.iter().map(|a| a.id.as_str()).collect();
    let colliding: Vec<String> = extra
        .articles
        .iter()
        .filter(|a| ids.contains(a.id.as_str()))
        .map(|a| a.id.clone())
        .collect();
    if !colliding.is_empty() {
        return Err(CorpusError::IdCollision(colliding));
    }
    let mut articles = base.articles.clone();
    articles.extend(extra.articles.iter().cloned());
    Corpus::new(base.name.clone(), articles)
}
