//! Output-directory layout and stamped writers.
//!
//! Every artifact carries a provenance line naming the tool version, the
//! config hash and the seed: a leading `# ...` line in text, CSV and JSON
//! Lines files, and a `provenance` field in JSON documents. Wall-clock
//! times go only to `run.log`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{require_file, RunConfig};

pub const ALL: &str = "corpus/all.jsonl";
pub const TRAIN: &str = "corpus/train.jsonl";
pub const TEST: &str = "corpus/test.jsonl";
pub const TRAIN_AUGMENTED: &str = "corpus/train_augmented.jsonl";
pub const AUGMENT_EXTRA: &str = "corpus/augment_extra.jsonl";
pub const FEATURES: &str = "features/features.csv";

#[derive(Serialize, Deserialize)]
struct Stamped<T> {
    provenance: String,
    data: T,
}

pub struct Ctx {
    pub cfg: RunConfig,
    pub provenance: String,
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> anyhow::Result<Self> {
        let provenance = format!("fakeaudit {} config={} seed={}", env!("CARGO_PKG_VERSION"), cfg.hash()?, cfg.seed);
        Ok(Ctx { cfg, provenance })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.cfg.out_dir.join(rel)
    }

    /// Path of an upstream artifact, which must exist.
    pub fn input(&self, rel: &str, produced_by: &str) -> anyhow::Result<PathBuf> {
        let p = self.path(rel);
        require_file(&p, &format!("{rel} (run `{produced_by}` first)"))?;
        Ok(p)
    }

    /// Creates the parent directory of `rel` and returns the full path.
    pub fn output(&self, rel: &str) -> anyhow::Result<PathBuf> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(p)
    }

    /// Removes every file in the directory `rel` (created if missing).
    pub fn fresh_dir(&self, rel: &str) -> anyhow::Result<PathBuf> {
        let dir = self.path(rel);
        if dir.exists() {
            for entry in fs::read_dir(&dir).with_context(|| format!("reading {}", dir.display()))? {
                let p = entry?.path();
                if p.is_file() {
                    fs::remove_file(&p).with_context(|| format!("removing {}", p.display()))?;
                }
            }
        }
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    pub fn header(&self) -> String {
        format!("# {}\n", self.provenance)
    }

    /// Writes `body` preceded by the provenance line.
    pub fn write_text(&self, rel: &str, body: &str) -> anyhow::Result<PathBuf> {
        let p = self.output(rel)?;
        let mut text = self.header();
        text.push_str(body);
        if !text.ends_with('\n') {
            text.push('\n');
        }
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    /// Writes through `f`, which receives a buffer already holding the
    /// provenance line.
    pub fn write_with(&self, rel: &str, f: impl FnOnce(&mut Vec<u8>) -> anyhow::Result<()>) -> anyhow::Result<PathBuf> {
        let mut buf = self.header().into_bytes();
        f(&mut buf)?;
        let p = self.output(rel)?;
        fs::write(&p, buf).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, data: &T) -> anyhow::Result<PathBuf> {
        let p = self.output(rel)?;
        let doc = Stamped { provenance: self.provenance.clone(), data };
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    pub fn log_run(&self, command: &str, status: &str) -> std::io::Result<()> {
        if !self.cfg.out_dir.exists() {
            return Ok(());
        }
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut f = fs::OpenOptions::new().create(true).append(true).open(self.path("run.log"))?;
        writeln!(f, "{secs}\t{command}\t{}\t{status}", self.provenance)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: Stamped<T> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(doc.data)
}

/// Non-comment, non-blank lines of a list file.
pub fn read_list(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}
