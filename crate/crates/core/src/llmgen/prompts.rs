//! Prompt templates and prompt construction.

use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{GenError, Result};
use crate::corpus::{Article, Label, Source};

/// Longest seed excerpt passed to generation prompts, in words.
pub const SUMMARY_WORDS: usize = 120;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub name: String,
    pub version: String,
    /// Body with comment lines removed.
    pub text: String,
}

impl Template {
    /// Parses a template file. A leading `#version <v>` line sets the
    /// version; other `#` lines are comments.
    pub fn parse(name: &str, source: &str) -> Result<Self> {
        let mut version = None;
        let mut lines = Vec::new();
        for line in source.lines() {
            if let Some(v) = line.strip_prefix("#version") {
                version = Some(v.trim().to_string());
            } else if !line.starts_with('#') {
                lines.push(line);
            }
        }
        let text = lines.join("\n").trim().to_string();
        if text.is_empty() {
            return Err(GenError::Template(format!("{name}: template is empty")));
        }
        let t = Template {
            name: name.into(),
            version: version.unwrap_or_else(|| "unversioned".into()),
            text,
        };
        for ph in placeholders(&t.text) {
            if ph != "title" && ph != "summary" {
                return Err(GenError::Template(format!("{name}: unknown placeholder {{{{{ph}}}}}")));
            }
        }
        Ok(t)
    }

    pub fn render(&self, title: &str, summary: &str) -> String {
        // single pass so placeholder-like text inside the seed is left alone
        let re = placeholder_re();
        re.replace_all(&self.text, |c: &regex::Captures| match &c[1] {
            "title" => title.to_string(),
            _ => summary.to_string(),
        })
        .into_owned()
    }
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{\s*([A-Za-z_]+)\s*\}\}").unwrap())
}

fn placeholders(text: &str) -> Vec<String> {
    placeholder_re().captures_iter(text).map(|c| c[1].to_string()).collect()
}

/// The four templates used for generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub smp_title: Template,
    pub smp_body: Template,
    pub paraphrase_title: Template,
    pub paraphrase_body: Template,
}

pub const TEMPLATE_FILES: [&str; 4] = ["smp_title", "smp_body", "paraphrase_title", "paraphrase_body"];

impl TemplateSet {
    pub fn builtin() -> Self {
        let get = |name: &str, src: &str| Template::parse(name, src).expect("bundled template parses");
        TemplateSet {
            smp_title: get("smp_title", include_str!("../../data/templates/smp_title.txt")),
            smp_body: get("smp_body", include_str!("../../data/templates/smp_body.txt")),
            paraphrase_title: get("paraphrase_title", include_str!("../../data/templates/paraphrase_title.txt")),
            paraphrase_body: get("paraphrase_body", include_str!("../../data/templates/paraphrase_body.txt")),
        }
    }

    /// Loads `<name>.txt` for every template name from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let load = |name: &str| -> Result<Template> {
            let path = dir.join(format!("{name}.txt"));
            let text = std::fs::read_to_string(&path)
                .map_err(|e| GenError::Template(format!("{}: {e}", path.display())))?;
            Template::parse(name, &text)
        };
        let set = TemplateSet {
            smp_title: load("smp_title")?,
            smp_body: load("smp_body")?,
            paraphrase_title: load("paraphrase_title")?,
            paraphrase_body: load("paraphrase_body")?,
        };
        set.check_placeholders()?;
        Ok(set)
    }

    pub fn all(&self) -> [&Template; 4] {
        [&self.smp_title, &self.smp_body, &self.paraphrase_title, &self.paraphrase_body]
    }

    fn check_placeholders(&self) -> Result<()> {
        for t in [&self.smp_title, &self.paraphrase_title] {
            if !placeholders(&t.text).iter().any(|p| p == "title") {
                return Err(GenError::Template(format!("{}: missing {{{{title}}}}", t.name)));
            }
        }
        for t in [&self.smp_body, &self.paraphrase_body] {
            if !placeholders(&t.text).iter().any(|p| p == "summary") {
                return Err(GenError::Template(format!("{}: missing {{{{summary}}}}", t.name)));
            }
        }
        Ok(())
    }
}

fn lint_patterns() -> &'static Vec<Regex> {
    static RE: OnceLock<Vec<Regex>> = OnceLock::new();
    RE.get_or_init(|| {
        include_str!("../../data/template_lint.txt")
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(|l| Regex::new(l).expect("bundled lint pattern compiles"))
            .collect()
    })
}

/// Lint findings for a template: phrases that name the task or invite a
/// header the model would echo back.
pub fn lint_template(t: &Template) -> Vec<String> {
    lint_patterns()
        .iter()
        .filter_map(|re| re.find(&t.text).map(|m| format!("{}: {:?} matches {}", t.name, m.as_str(), re.as_str())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptKind {
    /// Structured mimicry of a human-written fake seed.
    Smp,
    /// Meaning-preserving rewrite of a human-written real seed.
    Paraphrase,
}

impl PromptKind {
    pub fn target_label(self) -> Label {
        match self {
            PromptKind::Smp => Label::Fake,
            PromptKind::Paraphrase => Label::Real,
        }
    }
}

/// Title and body requests for one seed; they are sent as separate calls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmpPrompt {
    pub kind: PromptKind,
    pub origin_id: String,
    pub title_instruction: String,
    pub body_instruction: String,
    pub seed_title: String,
    pub seed_summary: String,
    pub template_version: String,
}

/// Leading sentences of `text` up to `max_words` words. A first sentence
/// longer than the limit is cut at the limit.
pub fn seed_summary(text: &str, max_words: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() <= max_words {
        return words.join(" ");
    }
    let head = &words[..max_words];
    let last_end = head
        .iter()
        .rposition(|w| w.ends_with(['.', '!', '?']) || w.ends_with(".\"") || w.ends_with(".”"));
    match last_end {
        Some(i) => head[..=i].join(" "),
        None => head.join(" "),
    }
}

fn check_seed(seed: &Article, label: Label) -> Result<()> {
    if seed.source != Source::Human || seed.label != label {
        return Err(GenError::Precondition(format!(
            "seed {} is {}, expected a human-written {:?} article",
            seed.id,
            seed.subgroup(),
            label
        )));
    }
    if seed.title.trim().is_empty() {
        return Err(GenError::Precondition(format!("seed {} has no title", seed.id)));
    }
    if seed.text.trim().is_empty() {
        return Err(GenError::Precondition(format!("seed {} has no text", seed.id)));
    }
    Ok(())
}

pub fn build_smp_prompt(seed: &Article, templates: &TemplateSet) -> Result<SmpPrompt> {
    check_seed(seed, Label::Fake)?;
    let title = seed.title.trim();
    let summary = seed_summary(&seed.text, SUMMARY_WORDS);
    Ok(SmpPrompt {
        kind: PromptKind::Smp,
        origin_id: seed.id.clone(),
        title_instruction: templates.smp_title.render(title, &summary),
        body_instruction: templates.smp_body.render(title, &summary),
        seed_title: title.to_string(),
        seed_summary: summary,
        template_version: templates.smp_title.version.clone(),
    })
}

/// Paraphrase prompts carry the whole seed body, since every claim must
/// survive the rewrite.
pub fn build_paraphrase_prompt(seed: &Article, templates: &TemplateSet) -> Result<SmpPrompt> {
    check_seed(seed, Label::Real)?;
    let title = seed.title.trim();
    let body = seed.text.trim();
    Ok(SmpPrompt {
        kind: PromptKind::Paraphrase,
        origin_id: seed.id.clone(),
        title_instruction: templates.paraphrase_title.render(title, body),
        body_instruction: templates.paraphrase_body.render(title, body),
        seed_title: title.to_string(),
        seed_summary: body.to_string(),
        template_version: templates.paraphrase_title.version.clone(),
    })
}

pub fn build_prompt(kind: PromptKind, seed: &Article, templates: &TemplateSet) -> Result<SmpPrompt> {
    match kind {
        PromptKind::Smp => build_smp_prompt(seed, templates),
        PromptKind::Paraphrase => build_paraphrase_prompt(seed, templates),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(label: Label, title: &str) -> Article {
        Article {
            id: "s1".into(),
            title: title.into(),
            text: "First sentence here. Second one follows.".into(),
            label,
            source: Source::Human,
            origin_id: None,
        }
    }

    #[test]
    fn title_embedded_verbatim() {
        let t = TemplateSet::builtin();
        let p = build_smp_prompt(&seed(Label::Fake, "Senator {{odd}} Seen"), &t).unwrap();
        assert!(p.title_instruction.contains("Senator {{odd}} Seen"));
        assert!(p.body_instruction.contains("First sentence here."));
        assert_eq!(p.template_version, "smp-1");
        assert_eq!(p, build_smp_prompt(&seed(Label::Fake, "Senator {{odd}} Seen"), &t).unwrap());
    }

    #[test]
    fn preconditions() {
        let t = TemplateSet::builtin();
        assert!(matches!(build_paraphrase_prompt(&seed(Label::Fake, "x"), &t), Err(GenError::Precondition(_))));
        assert!(matches!(build_smp_prompt(&seed(Label::Real, "x"), &t), Err(GenError::Precondition(_))));
        assert!(build_smp_prompt(&seed(Label::Fake, "  "), &t).is_err());
        assert!(build_paraphrase_prompt(&seed(Label::Real, "x"), &t).is_ok());
    }

    #[test]
    fn bundled_templates_pass_lint() {
        for t in TemplateSet::builtin().all() {
            assert_eq!(lint_template(t), Vec::<String>::new());
        }
        let bad = Template::parse("x", "Write fake news.\nHeadline: {{title}}").unwrap();
        assert_eq!(lint_template(&bad).len(), 2);
    }

    #[test]
    fn unknown_placeholder_rejected() {
        assert!(Template::parse("x", "{{author}}").is_err());
    }

    #[test]
    fn summary_stops_at_sentence() {
        let text = format!("{} end. {}", "word ".repeat(100), "more ".repeat(50));
        let s = seed_summary(&text, 120);
        assert!(s.ends_with("end."));
        assert_eq!(seed_summary("short text", 120), "short text");
    }
}
