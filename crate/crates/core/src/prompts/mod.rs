//! Stage prompts and parsing of the name-suggestion answer.
//!
//! Every prompt has the same anatomy, in this order: a persona, an
//! instruction written with action words, the fenced context blocks, a
//! step-by-step reasoning cue, and a positively framed output format.
//! Templates are plain text files with `[persona]`, `[instruction]`,
//! `[context]`, `[reasoning]` and `[format]` sections and the placeholders
//! `{{test_source}}`, `{{class_source}}` and `{{taken_names}}`.

use crate::testlang::{is_identifier, is_keyword};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("the {0} prompt needs the class-under-test source")]
    MissingContext(Stage),
    #[error("template for {stage}: {detail}")]
    BadTemplate { stage: Stage, detail: String },
    #[error("no template loaded for {0}")]
    MissingTemplate(Stage),
    #[error("test source is empty")]
    EmptyTestSource,
    #[error("no test name found in response")]
    NoNameFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    DataRefinement,
    PostProcess,
    PostProcessRelaxed,
    NameSuggestion,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::DataRefinement,
        Stage::PostProcess,
        Stage::PostProcessRelaxed,
        Stage::NameSuggestion,
    ];

    /// Tag carried on requests and cassette entries.
    pub fn tag(self) -> &'static str {
        match self {
            Stage::DataRefinement => "data_refinement",
            Stage::PostProcess => "post_process",
            Stage::PostProcessRelaxed => "post_process_relaxed",
            Stage::NameSuggestion => "name_suggestion",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.txt", self.tag())
    }

    pub fn requires_class_source(self) -> bool {
        self == Stage::DataRefinement
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

const PLACEHOLDERS: [&str; 3] = ["test_source", "class_source", "taken_names"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub stage: Stage,
    pub persona: String,
    pub instruction: String,
    pub context: String,
    pub reasoning_cue: String,
    pub format_spec: String,
}

impl PromptTemplate {
    pub fn parse(stage: Stage, text: &str) -> Result<Self, PromptError> {
        let bad = |detail: String| PromptError::BadTemplate { stage, detail };
        let mut sections: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut current: Option<&str> = None;
        for line in text.lines() {
            let t = line.trim();
            if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                if ["persona", "instruction", "context", "reasoning", "format"].contains(&name) {
                    if sections.contains_key(name) {
                        return Err(bad(format!("section [{name}] appears twice")));
                    }
                    sections.insert(name, Vec::new());
                    current = Some(name);
                    continue;
                }
            }
            match current {
                Some(name) => sections.get_mut(name).unwrap().push(line),
                None if t.is_empty() => {}
                None => return Err(bad("text before the first section".into())),
            }
        }
        let mut take = |name: &str| -> Result<String, PromptError> {
            let body = sections.remove(name).unwrap_or_default().join("\n");
            let body = body.trim().to_string();
            if body.is_empty() {
                Err(bad(format!("section [{name}] is missing or empty")))
            } else {
                Ok(body)
            }
        };
        let tpl = PromptTemplate {
            stage,
            persona: take("persona")?,
            instruction: take("instruction")?,
            context: take("context")?,
            reasoning_cue: take("reasoning")?,
            format_spec: take("format")?,
        };
        for section in [&tpl.persona, &tpl.instruction, &tpl.context, &tpl.reasoning_cue, &tpl.format_spec] {
            for name in placeholders_in(section) {
                if !PLACEHOLDERS.contains(&name) {
                    return Err(bad(format!("unknown placeholder {{{{{name}}}}}")));
                }
            }
        }
        if !tpl.context.contains("{{test_source}}") {
            return Err(bad("context does not embed {{test_source}}".into()));
        }
        Ok(tpl)
    }
}

fn placeholders_in(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = s;
    while let Some(start) = rest.find("{{") {
        let after = &rest[start + 2..];
        match after.find("}}") {
            Some(end) => {
                out.push(after[..end].trim());
                rest = &after[end + 2..];
            }
            None => break,
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptContext {
    pub test_source: String,
    pub class_under_test_source: Option<String>,
    pub taken_names: Vec<String>,
    pub extra_notes: Option<String>,
}

impl PromptContext {
    pub fn for_test(test_source: impl Into<String>) -> Self {
        PromptContext {
            test_source: test_source.into(),
            ..Default::default()
        }
    }
}

/// The four stage templates.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    templates: BTreeMap<Stage, PromptTemplate>,
}

impl TemplateSet {
    /// Templates compiled into the binary.
    pub fn builtin() -> Self {
        let sources = [
            (Stage::DataRefinement, include_str!("../../templates/data_refinement.txt")),
            (Stage::PostProcess, include_str!("../../templates/post_process.txt")),
            (Stage::PostProcessRelaxed, include_str!("../../templates/post_process_relaxed.txt")),
            (Stage::NameSuggestion, include_str!("../../templates/name_suggestion.txt")),
        ];
        Self::from_sources(sources).expect("builtin templates are valid")
    }

    /// Builds a set from (stage, text) pairs; every stage must be present.
    pub fn from_sources<'a>(sources: impl IntoIterator<Item = (Stage, &'a str)>) -> Result<Self, PromptError> {
        let mut templates = BTreeMap::new();
        for (stage, text) in sources {
            templates.insert(stage, PromptTemplate::parse(stage, text)?);
        }
        if let Some(missing) = Stage::ALL.into_iter().find(|s| !templates.contains_key(s)) {
            return Err(PromptError::MissingTemplate(missing));
        }
        Ok(TemplateSet { templates })
    }

    pub fn get(&self, stage: Stage) -> &PromptTemplate {
        &self.templates[&stage]
    }

    pub fn render(&self, stage: Stage, ctx: &PromptContext) -> Result<String, PromptError> {
        render_prompt(self.get(stage), ctx)
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

fn fill(section: &str, ctx: &PromptContext) -> String {
    let taken = if ctx.taken_names.is_empty() {
        "(none)".to_string()
    } else {
        ctx.taken_names.iter().map(|n| format!("- {n}")).collect::<Vec<_>>().join("\n")
    };
    section
        .replace("{{test_source}}", ctx.test_source.trim_end())
        .replace("{{class_source}}", ctx.class_under_test_source.as_deref().unwrap_or("").trim_end())
        .replace("{{taken_names}}", &taken)
}

/// Renders one prompt. Output is a pure function of its inputs.
pub fn render_prompt(template: &PromptTemplate, ctx: &PromptContext) -> Result<String, PromptError> {
    if ctx.test_source.trim().is_empty() {
        return Err(PromptError::EmptyTestSource);
    }
    if template.stage.requires_class_source()
        && ctx.class_under_test_source.as_deref().is_none_or(|s| s.trim().is_empty())
    {
        return Err(PromptError::MissingContext(template.stage));
    }
    let mut parts = vec![
        fill(&template.persona, ctx),
        fill(&template.instruction, ctx),
        fill(&template.context, ctx),
    ];
    if let Some(notes) = ctx.extra_notes.as_deref().filter(|n| !n.trim().is_empty()) {
        parts.push(format!("Note: {}", notes.trim()));
    }
    parts.push(fill(&template.reasoning_cue, ctx));
    parts.push(fill(&template.format_spec, ctx));
    let mut out = parts.join("\n\n");
    out.push('\n');
    Ok(out)
}

/// Pulls a test method name out of a free-form answer and forces the
/// `test` prefix.
pub fn parse_name_response(response: &str) -> Result<String, PromptError> {
    let fenced = fenced_contents(response);
    let backticked = backticked_spans(response);
    let candidate = fenced
        .iter()
        .chain(backticked.iter())
        .find_map(|s| name_in_code(s))
        .or_else(|| longest_camel_case(response))
        .ok_or(PromptError::NoNameFound)?;
    Ok(with_test_prefix(&candidate))
}

fn fenced_contents(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut lines = s.lines();
    while let Some(l) = lines.next() {
        if l.trim_start().starts_with("```") {
            let body: Vec<&str> = lines.by_ref().take_while(|l| !l.trim_start().starts_with("```")).collect();
            out.push(body.join("\n"));
        }
    }
    out
}

fn backticked_spans(s: &str) -> Vec<String> {
    let stripped: String = s.lines().filter(|l| !l.trim_start().starts_with("```")).collect::<Vec<_>>().join("\n");
    stripped.split('`').skip(1).step_by(2).map(str::to_string).collect()
}

fn words(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        let word_char = c.is_ascii_alphanumeric() || c == '_';
        match (word_char, start) {
            (true, None) => start = Some(i),
            (false, Some(st)) => {
                out.push((st, &s[st..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push((st, &s[st..]));
    }
    out.into_iter().filter(|(_, w)| is_identifier(w)).collect()
}

/// The method name in a code-ish snippet: the identifier before `(` if
/// any, else the first non-keyword identifier.
fn name_in_code(s: &str) -> Option<String> {
    let ws = words(s);
    let before_paren = ws.iter().find(|(i, w)| {
        !is_keyword(w) && s[i + w.len()..].trim_start().starts_with('(')
    });
    before_paren
        .or_else(|| ws.iter().find(|(_, w)| !is_keyword(w)))
        .map(|(_, w)| w.to_string())
}

fn is_camel_case(w: &str) -> bool {
    let b = w.as_bytes();
    let has_hump = b.windows(2).any(|p| p[0].is_ascii_lowercase() && p[1].is_ascii_uppercase());
    has_hump || (w.starts_with("test") && w.len() > 4)
}

fn longest_camel_case(s: &str) -> Option<String> {
    let mut best: Option<&str> = None;
    for (_, w) in words(s) {
        if is_camel_case(w) && best.is_none_or(|b| w.len() > b.len()) {
            best = Some(w);
        }
    }
    best.map(str::to_string)
}

fn with_test_prefix(name: &str) -> String {
    if name.starts_with("test") {
        return name.to_string();
    }
    if let Some(rest) = name.strip_prefix("Test") {
        return format!("test{rest}");
    }
    let mut chars = name.chars();
    let first = chars.next().map(|c| c.to_ascii_uppercase()).unwrap_or_default();
    format!("test{first}{}", chars.as_str())
}
