//! Turning generation records into a machine-written corpus, plus the
//! record and review file formats.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{GenError, GenerationRecord, Result};
use crate::corpus::{Article, Corpus, Label, Source};

pub const DEFAULT_MIN_BODY_WORDS: usize = 50;

/// Id of the machine article generated from `origin`.
pub fn machine_id(label: Label, origin: &str) -> String {
    match label {
        Label::Fake => format!("mf-{origin}"),
        Label::Real => format!("mr-{origin}"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub origin_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub corpus: Corpus,
    pub excluded: Vec<Exclusion>,
}

/// Builds machine articles with `target_label` from the accepted records.
///
/// Rejected records and records whose body is shorter than
/// `min_body_words` words are listed in `excluded`. When `seeds` is given,
/// every origin must resolve to a human-written article there.
pub fn assemble_machine_corpus(
    records: &[GenerationRecord],
    target_label: Label,
    seeds: Option<&Corpus>,
    min_body_words: usize,
    name: &str,
) -> Result<Assembly> {
    let mut articles = Vec::new();
    let mut excluded = Vec::new();
    let mut seen = HashSet::new();
    for r in records {
        if r.kind.target_label() != target_label {
            return Err(GenError::Precondition(format!(
                "record {} was generated for {:?} articles, not {:?}",
                r.origin_id,
                r.kind.target_label(),
                target_label
            )));
        }
        if !seen.insert(r.origin_id.as_str()) {
            return Err(GenError::Precondition(format!("duplicate record for seed {}", r.origin_id)));
        }
        let reason = if !r.accepted {
            Some(r.rejection_reason.clone().unwrap_or_else(|| "rejected".into()))
        } else if r.title.trim().is_empty() {
            Some("empty title".into())
        } else {
            let words = r.body.split_whitespace().count();
            (words < min_body_words).then(|| format!("body has {words} words, minimum is {min_body_words}"))
        };
        match reason {
            Some(reason) => excluded.push(Exclusion { origin_id: r.origin_id.clone(), reason }),
            None => articles.push(Article {
                id: machine_id(target_label, &r.origin_id),
                title: r.title.clone(),
                text: r.body.clone(),
                label: target_label,
                source: Source::Machine,
                origin_id: Some(r.origin_id.clone()),
            }),
        }
    }
    if articles.is_empty() {
        return Err(GenError::NoAcceptedRecords);
    }
    let corpus = Corpus::new(name, articles)?;
    if let Some(seeds) = seeds {
        corpus.check_origins(seeds)?;
    }
    Ok(Assembly { corpus, excluded })
}

pub fn write_records(records: &[GenerationRecord], mut out: impl Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| GenError::Io { path: "<records>".into(), source: e })?;
    }
    Ok(())
}

pub fn read_records(input: impl BufRead) -> Result<Vec<GenerationRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| GenError::Io { path: "<records>".into(), source: e })?;
        if !line.trim().is_empty() && !line.starts_with('#') {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct ReviewRow {
    id: String,
    accepted: bool,
    #[serde(default)]
    reason: String,
}

/// Writes the `id,accepted,reason` review sheet, keyed by seed id.
pub fn write_review(records: &[GenerationRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(ReviewRow {
            id: r.origin_id.clone(),
            accepted: r.accepted,
            reason: r.rejection_reason.clone().unwrap_or_default(),
        })?;
    }
    w.flush().map_err(|e| GenError::Io { path: "<review>".into(), source: e })?;
    Ok(())
}

/// Applies human accept/reject decisions. Records absent from the sheet
/// keep their automatic decision; ids unknown to `records` are an error.
/// A record can only be accepted if its sanitized output is nonempty.
/// Lines starting with `#` are comments.
pub fn apply_review(records: &mut [GenerationRecord], input: impl std::io::Read) -> Result<usize> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let mut decisions = BTreeMap::new();
    for row in rdr.deserialize() {
        let row: ReviewRow = row?;
        if decisions.insert(row.id.clone(), row).is_some() {
            return Err(GenError::Review("duplicate id in review sheet".into()));
        }
    }
    let known: HashSet<&str> = records.iter().map(|r| r.origin_id.as_str()).collect();
    if let Some(id) = decisions.keys().find(|id| !known.contains(id.as_str())) {
        return Err(GenError::Review(format!("unknown id {id}")));
    }
    let mut changed = 0;
    for r in records.iter_mut() {
        let Some(d) = decisions.get(&r.origin_id) else { continue };
        if d.accepted && (r.title.is_empty() || r.body.is_empty()) {
            return Err(GenError::Review(format!("{} cannot be accepted: sanitized output is empty", r.origin_id)));
        }
        if d.accepted != r.accepted {
            changed += 1;
        }
        r.accepted = d.accepted;
        r.rejection_reason = if d.accepted {
            None
        } else if d.reason.trim().is_empty() {
            Some("rejected in review".into())
        } else {
            Some(d.reason.trim().to_string())
        };
    }
    Ok(changed)
}
