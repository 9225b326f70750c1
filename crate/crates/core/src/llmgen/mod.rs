//! LLM-driven corpus generation: prompts built from human-written seeds,
//! an OpenAI-compatible chat client, output cleanup, and assembly of the
//! accepted outputs into machine-written corpora.

mod assemble;
mod client;
mod prompts;
mod sanitize;

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Article, CorpusError};

pub use assemble::{
    apply_review, assemble_machine_corpus, machine_id, read_records, write_records, write_review, Assembly,
    Exclusion, DEFAULT_MIN_BODY_WORDS,
};
pub use client::{
    backoff_delay, ChatTransport, Clock, HttpResponse, LlmClient, LlmEndpointConfig, ManualClock, RateLimiter,
    SystemClock, UreqTransport,
};
pub use prompts::{
    build_paraphrase_prompt, build_prompt, build_smp_prompt, lint_template, seed_summary, PromptKind, SmpPrompt,
    Template, TemplateSet, SUMMARY_WORDS, TEMPLATE_FILES,
};
pub use sanitize::{contains_disclaimer, disclaimer_patterns, sanitize};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("template error: {0}")]
    Template(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid endpoint config: {0}")]
    Config(String),
    #[error("environment variable {0} holding the API key is unset or empty")]
    MissingApiKey(String),
    #[error("authentication failed (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("request rejected (HTTP {status}): {body}")]
    Http { status: u16, body: String },
    #[error("giving up after {attempts} attempts: {}", .log.join("; "))]
    RetriesExhausted { attempts: u32, log: Vec<String> },
    #[error("malformed response: {0}")]
    BadResponse(String),
    #[error("no accepted records to assemble")]
    NoAcceptedRecords,
    #[error("review file: {0}")]
    Review(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl GenError {
    /// Errors that will recur for every request, so a batch should stop.
    pub fn is_fatal(&self) -> bool {
        matches!(self, GenError::Auth { .. } | GenError::MissingApiKey(_) | GenError::Config(_))
    }
}

pub type Result<T, E = GenError> = std::result::Result<T, E>;

/// Outcome of generating one article from one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub origin_id: String,
    pub kind: PromptKind,
    pub template_version: String,
    pub prompt: SmpPrompt,
    pub raw_title: String,
    pub raw_body: String,
    pub title: String,
    pub body: String,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection_reason: Option<String>,
}

impl GenerationRecord {
    /// Builds a record from raw outputs, sanitizing and filtering them.
    pub fn from_outputs(prompt: &SmpPrompt, raw_title: String, raw_body: String) -> Self {
        let title = sanitize(&raw_title);
        let body = sanitize(&raw_body);
        let rejection_reason = if title.is_empty() {
            Some("title empty after sanitization".to_string())
        } else if body.is_empty() {
            Some("body empty after sanitization".to_string())
        } else if contains_disclaimer(&title) || contains_disclaimer(&body) {
            Some("disclaimer survived sanitization".to_string())
        } else {
            None
        };
        GenerationRecord {
            origin_id: prompt.origin_id.clone(),
            kind: prompt.kind,
            template_version: prompt.template_version.clone(),
            prompt: prompt.clone(),
            raw_title,
            raw_body,
            title,
            body,
            accepted: rejection_reason.is_none(),
            rejection_reason,
        }
    }
}

/// Sends the title and body requests for one prompt.
pub fn generate<T: ChatTransport, C: Clock>(prompt: &SmpPrompt, client: &LlmClient<T, C>) -> Result<GenerationRecord> {
    let raw_title = client.complete(&prompt.title_instruction)?;
    let raw_body = client.complete(&prompt.body_instruction)?;
    Ok(GenerationRecord::from_outputs(prompt, raw_title, raw_body))
}

/// Builds prompts for every seed and generates them with up to
/// `max_in_flight` concurrent workers sharing the client's rate limiter.
///
/// Results are ordered by seed id. A fatal error (bad credentials) stops
/// the remaining work and is returned; other per-seed failures are kept
/// in the result list.
pub fn generate_batch<T: ChatTransport, C: Clock>(
    kind: PromptKind,
    seeds: &[&Article],
    templates: &TemplateSet,
    client: &LlmClient<T, C>,
) -> Result<Vec<(String, Result<GenerationRecord>)>> {
    let mut prompts = seeds
        .iter()
        .map(|s| build_prompt(kind, s, templates))
        .collect::<Result<Vec<_>>>()?;
    prompts.sort_by(|a, b| a.origin_id.cmp(&b.origin_id));

    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Result<GenerationRecord>>>> =
        Mutex::new((0..prompts.len()).map(|_| None).collect());
    let workers = client.config().max_in_flight.min(prompts.len()).max(1);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(p) = prompts.get(i) else { break };
                let r = generate(p, client);
                if r.as_ref().is_err_and(GenError::is_fatal) {
                    stop.store(true, Ordering::SeqCst);
                }
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let results = results.into_inner().unwrap();
    let mut out = Vec::with_capacity(prompts.len());
    for (p, r) in prompts.iter().zip(results) {
        match r {
            Some(Err(e)) if e.is_fatal() => return Err(e),
            Some(r) => out.push((p.origin_id.clone(), r)),
            None => {}
        }
    }
    Ok(out)
}
