use super::{PipelineConfig, PipelineError};
use crate::codebleu::{codebleu_tests, CodeBleuScore};
use crate::llmclient::{LlmBackend, LlmRequest};
use crate::prompts::{parse_name_response, PromptContext, Stage, TemplateSet};
use crate::repair::{
    align_refinement, balance_brackets, check_comment_convention, demote_prose_lines, extract_code_block_logged,
    validate_logic_preserved, RepairError, RepairLog,
};
use crate::testlang::{
    has_method_header, normalize, parse_statements, parse_test_file, render, NormalizeOptions, RenderStyle,
    StatementKind, TestCase,
};
use std::collections::BTreeSet;

/// Stage operations bound to one backend and configuration.
pub struct Pipeline<'a> {
    pub backend: &'a dyn LlmBackend,
    pub config: &'a PipelineConfig,
    pub templates: TemplateSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineResult {
    pub test: TestCase,
    pub changed: bool,
    pub completions: usize,
    pub repair_log: RepairLog,
    /// Reason each unusable response was rejected.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostProcessResult {
    /// The accepted candidate, or the input test when nothing passed.
    pub test: TestCase,
    pub accepted: bool,
    pub completions: usize,
    pub repair_log: RepairLog,
    pub score: Option<CodeBleuScore>,
    pub rejections: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameResult {
    pub name: String,
    pub completions: usize,
    /// True when the name came from the suffix rule or the original name.
    pub fallback: bool,
}

impl<'a> Pipeline<'a> {
    pub fn new(backend: &'a dyn LlmBackend, config: &'a PipelineConfig) -> Self {
        Pipeline {
            backend,
            config,
            templates: TemplateSet::builtin(),
        }
    }

    pub fn with_templates(mut self, templates: TemplateSet) -> Self {
        self.templates = templates;
        self
    }

    fn complete(&self, stage: Stage, ctx: &PromptContext) -> Result<String, PipelineError> {
        let prompt = self.templates.render(stage, ctx)?;
        let settings = &self.config.llm;
        let request = LlmRequest {
            model: settings.model.clone(),
            prompt,
            temperature: settings.temperature,
            max_tokens: settings.max_tokens,
            stage_tag: stage.tag().to_string(),
        };
        Ok(self.backend.complete(&request)?)
    }

    /// Stage 1. Without a class source the test is returned untouched and no
    /// completion is issued.
    pub fn refine_test_data(&self, original: &TestCase, class_source: Option<&str>) -> Result<RefineResult, PipelineError> {
        let mut result = RefineResult {
            test: original.clone(),
            changed: false,
            completions: 0,
            repair_log: RepairLog::default(),
            failures: Vec::new(),
        };
        let Some(class_source) = class_source.filter(|s| !s.trim().is_empty()) else {
            return Ok(result);
        };
        for _ in 0..self.config.refine_attempts {
            let ctx = PromptContext {
                test_source: render(original, RenderStyle::WithComments),
                class_under_test_source: Some(class_source.to_string()),
                taken_names: Vec::new(),
                extra_notes: result.failures.last().map(|f| retry_note(f)),
            };
            let response = self.complete(Stage::DataRefinement, &ctx)?;
            result.completions += 1;
            match repair_refinement(original, &response) {
                Ok((test, log)) => {
                    result.changed = test != *original;
                    result.test = test;
                    result.repair_log = log;
                    return Ok(result);
                }
                Err(e) => {
                    log::debug!("refinement of {} rejected: {e}", original.name);
                    result.failures.push(e.to_string());
                }
            }
        }
        log::info!("refinement of {} gave up after {} attempts", original.name, result.completions);
        Ok(result)
    }

    /// Stage 2: the strict ladder, then the relaxed one. `note` is passed on
    /// to every prompt.
    pub fn post_process(&self, test: &TestCase, note: Option<&str>) -> Result<PostProcessResult, PipelineError> {
        let mut result = PostProcessResult {
            test: test.clone(),
            accepted: false,
            completions: 0,
            repair_log: RepairLog::default(),
            score: None,
            rejections: Vec::new(),
        };
        let source = render(test, RenderStyle::WithComments);
        let phases = [
            (Stage::PostProcess, self.config.strict_attempts, true),
            (Stage::PostProcessRelaxed, self.config.relaxed_attempts, false),
        ];
        for (stage, attempts, strict_phase) in phases {
            for _ in 0..attempts {
                let notes: Vec<String> = note
                    .map(str::to_string)
                    .into_iter()
                    .chain(result.rejections.last().map(|r| retry_note(r)))
                    .collect();
                let ctx = PromptContext {
                    test_source: source.clone(),
                    class_under_test_source: None,
                    taken_names: Vec::new(),
                    extra_notes: (!notes.is_empty()).then(|| notes.join(" ")),
                };
                let response = self.complete(stage, &ctx)?;
                result.completions += 1;
                match self.evaluate_candidate(test, &response, strict_phase) {
                    Ok((candidate, log, score)) => {
                        result.test = candidate;
                        result.accepted = true;
                        result.repair_log = log;
                        result.score = Some(score);
                        return Ok(result);
                    }
                    Err(reason) => {
                        log::debug!("{stage} candidate for {} rejected: {reason}", test.name);
                        result.rejections.push(reason);
                    }
                }
            }
        }
        Ok(result)
    }

    /// Runs every Stage-2 gate on one response.
    fn evaluate_candidate(
        &self,
        original: &TestCase,
        response: &str,
        strict_phase: bool,
    ) -> Result<(TestCase, RepairLog, CodeBleuScore), String> {
        let (code, mut log) = extract_code_block_logged(response).map_err(|e| e.to_string())?;
        let (code, demoted) = demote_prose_lines(&code);
        log.extend(demoted);
        let (code, balanced) = balance_brackets(&code).map_err(|e| e.to_string())?;
        log.extend(balanced);
        let candidate = candidate_from(original, &code)?;

        let known = opaque_texts(original);
        if let Some(new) = opaque_texts(&candidate).into_iter().find(|o| !known.contains(o)) {
            return Err(format!("statement does not parse: {}", new.lines().next().unwrap_or("")));
        }
        if render(&candidate, RenderStyle::WithComments) == render(original, RenderStyle::WithComments) {
            return Err("the test was returned unchanged".into());
        }
        if strict_phase && !check_comment_convention(&candidate) {
            return Err("comments do not follow Given, When, Then".into());
        }
        let score = codebleu_tests(&candidate, original, &self.config.metric_params()).map_err(|e| e.to_string())?;
        if score.combined < self.config.codebleu_threshold {
            return Err(format!(
                "similarity {:.3} is below the threshold {:.3}",
                score.combined, self.config.codebleu_threshold
            ));
        }
        if self.config.strict_logic_check && !validate_logic_preserved(original, &candidate, true) {
            return Err("the test logic changed".into());
        }
        Ok((candidate, log, score))
    }

    /// Stage 3. `taken` holds the names already in use; comparison ignores
    /// case.
    pub fn suggest_name(&self, test: &TestCase, taken: &[String]) -> Result<NameResult, PipelineError> {
        let lower: BTreeSet<String> = taken.iter().map(|n| n.to_lowercase()).collect();
        let is_free = |n: &str| !lower.contains(&n.to_lowercase());
        let mut listed: Vec<String> = taken.to_vec();
        listed.sort();
        listed.dedup();
        let mut completions = 0;
        let mut last: Option<String> = None;
        let mut rejection: Option<String> = None;
        for _ in 0..self.config.name_attempts {
            let ctx = PromptContext {
                test_source: render(test, RenderStyle::WithComments),
                class_under_test_source: None,
                taken_names: listed.clone(),
                extra_notes: rejection.clone(),
            };
            let response = self.complete(Stage::NameSuggestion, &ctx)?;
            completions += 1;
            match parse_name_response(&response) {
                Ok(name) if is_free(&name) => {
                    return Ok(NameResult {
                        name,
                        completions,
                        fallback: false,
                    })
                }
                Ok(name) => {
                    rejection = Some(format!("The name {name} is already used. Suggest a different name."));
                    last = Some(name);
                }
                Err(e) => rejection = Some(retry_note(&e.to_string())),
            }
        }
        let base = last.unwrap_or_else(|| test.name.clone());
        let name = if is_free(&base) {
            base
        } else {
            (2..)
                .map(|k| format!("{base}_{k}"))
                .find(|n| is_free(n))
                .expect("suffixes are unbounded")
        };
        Ok(NameResult {
            name,
            completions,
            fallback: true,
        })
    }
}

fn retry_note(reason: &str) -> String {
    format!("The previous answer could not be used ({reason}).")
}

fn repair_refinement(original: &TestCase, response: &str) -> Result<(TestCase, RepairLog), RepairError> {
    let (code, mut log) = extract_code_block_logged(response)?;
    let (code, demoted) = demote_prose_lines(&code);
    log.extend(demoted);
    let code = match balance_brackets(&code) {
        Ok((balanced, l)) => {
            log.extend(l);
            balanced
        }
        // alignment works line by line and tolerates what balancing cannot fix
        Err(_) => code,
    };
    let (test, align_log) = align_refinement(original, &code)?;
    log.extend(align_log);
    Ok((test, log))
}

/// Parses a Stage-2 answer. The original's name, annotations and throws
/// clause are kept whatever the answer says.
fn candidate_from(original: &TestCase, code: &str) -> Result<TestCase, String> {
    let statements = if has_method_header(code) {
        let mut tests = parse_test_file(code).map_err(|e| format!("answer does not parse: {e}"))?;
        tests.swap_remove(0).statements
    } else {
        parse_statements(code).map_err(|e| format!("answer does not parse: {e}"))?
    };
    if statements.iter().all(|s| s.is_comment()) {
        return Err("answer holds no statements".into());
    }
    Ok(TestCase {
        statements,
        ..original.clone()
    })
}

/// Normalized text of every opaque statement, comment lines removed.
fn opaque_texts(test: &TestCase) -> BTreeSet<String> {
    normalize(test, NormalizeOptions::ALL)
        .statements
        .iter()
        .filter_map(|s| match &s.kind {
            StatementKind::Opaque(raw) => Some(
                raw.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with("//"))
                    .collect::<Vec<_>>()
                    .join("\n"),
            ),
            _ => None,
        })
        .collect()
}

/// Union of both suites with duplicates removed.
///
/// Entries are taken in the order original 0, refined 0, original 1, …;
/// duplicates share the normalized, comment-stripped render under a fixed
/// name. Each group keeps its shortest member, then the lexicographically
/// smallest stripped render, then the earliest entry. Survivors keep entry
/// order.
pub fn merge_and_dedup(originals: &[TestCase], refined: &[TestCase]) -> Vec<TestCase> {
    let entries = interleave(originals, refined);
    dedup_survivors(&entries).into_iter().map(|i| entries[i].clone()).collect()
}

pub(crate) fn interleave(originals: &[TestCase], refined: &[TestCase]) -> Vec<TestCase> {
    let mut out = Vec::with_capacity(originals.len() + refined.len());
    for i in 0..originals.len().max(refined.len()) {
        out.extend(originals.get(i).cloned());
        out.extend(refined.get(i).cloned());
    }
    out
}

pub(crate) fn dedup_key(test: &TestCase) -> String {
    let mut n = normalize(test, NormalizeOptions::ALL);
    n.name = "t".into();
    render(&n, RenderStyle::Stripped)
}

/// Indices of the surviving entries, ascending.
pub(crate) fn dedup_survivors(entries: &[TestCase]) -> Vec<usize> {
    use std::collections::BTreeMap;
    let mut best: BTreeMap<String, (usize, String, usize)> = BTreeMap::new();
    for (i, t) in entries.iter().enumerate() {
        let rank = (crate::testlang::total_length(t), render(t, RenderStyle::Stripped), i);
        best.entry(dedup_key(t))
            .and_modify(|b| {
                if rank < *b {
                    *b = rank.clone();
                }
            })
            .or_insert(rank);
    }
    let mut keep: Vec<usize> = best.into_values().map(|(_, _, i)| i).collect();
    keep.sort_unstable();
    keep
}
