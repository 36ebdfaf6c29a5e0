use super::PipelineError;
use crate::codebleu::{MetricParams, Weights};
use crate::llmclient::{DEFAULT_MAX_TOKENS, DEFAULT_MODEL, DEFAULT_TEMPERATURE};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifierMode {
    /// Re-parsing the rendered test stands in for compilation; every test
    /// that re-parses is stable.
    #[default]
    BuiltinSyntax,
    /// Runs `command_template` through `sh -c` for the compile step and
    /// again with `--run` appended for the run step.
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifierCommand {
    pub mode: VerifierMode,
    /// Shell command; `{file}` is replaced by the rendered test's path.
    pub command_template: String,
    /// A failing run whose output contains one of these is unstable.
    pub unstable_markers: Vec<String>,
    /// A failing run whose output contains one of these is an ordinary
    /// assertion failure, never unstable.
    pub assertion_markers: Vec<String>,
}

impl Default for VerifierCommand {
    fn default() -> Self {
        VerifierCommand {
            mode: VerifierMode::BuiltinSyntax,
            command_template: String::new(),
            unstable_markers: vec!["Exception".into(), "Error".into()],
            assertion_markers: vec![
                "AssertionError".into(),
                "AssertionFailedError".into(),
                "ComparisonFailure".into(),
            ],
        }
    }
}

impl VerifierCommand {
    pub fn external(command_template: impl Into<String>) -> Self {
        VerifierCommand {
            mode: VerifierMode::External,
            command_template: command_template.into(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.mode == VerifierMode::External && self.command_template.trim().is_empty() {
            return Err(PipelineError::Config("external verifier needs a command template".into()));
        }
        Ok(())
    }
}

/// Model settings sent with every completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSettings {
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for LlmSettings {
    fn default() -> Self {
        LlmSettings {
            model: DEFAULT_MODEL.into(),
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub codebleu_threshold: f64,
    pub strict_attempts: usize,
    pub relaxed_attempts: usize,
    pub postprocess_budget: usize,
    pub refine_attempts: usize,
    pub name_attempts: usize,
    pub strict_logic_check: bool,
    pub weights: Weights,
    pub verifier: VerifierCommand,
    pub llm: LlmSettings,
    /// Width of the worker pool.
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            codebleu_threshold: 0.5,
            strict_attempts: 3,
            relaxed_attempts: 3,
            postprocess_budget: 2,
            refine_attempts: 3,
            name_attempts: 3,
            strict_logic_check: false,
            weights: Weights::default(),
            verifier: VerifierCommand::default(),
            llm: LlmSettings::default(),
            workers: 4,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(0.0..=1.0).contains(&self.codebleu_threshold) {
            return Err(PipelineError::Config(format!(
                "codebleu_threshold {} is outside [0, 1]",
                self.codebleu_threshold
            )));
        }
        for (name, v) in [
            ("strict_attempts", self.strict_attempts),
            ("relaxed_attempts", self.relaxed_attempts),
            ("postprocess_budget", self.postprocess_budget),
            ("refine_attempts", self.refine_attempts),
            ("name_attempts", self.name_attempts),
            ("workers", self.workers),
        ] {
            if v == 0 {
                return Err(PipelineError::Config(format!("{name} must be at least 1")));
            }
        }
        self.weights
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.llm.max_tokens == 0 || !(self.llm.temperature.is_finite() && self.llm.temperature >= 0.0) {
            return Err(PipelineError::Config("invalid model settings".into()));
        }
        self.verifier.validate()
    }

    pub fn metric_params(&self) -> MetricParams {
        MetricParams {
            weights: self.weights,
            ..MetricParams::default()
        }
    }

    /// Most completions one test can consume across all stages.
    pub fn completion_ceiling(&self) -> usize {
        let ladder = self.strict_attempts + self.relaxed_attempts;
        self.refine_attempts
            + ladder
            + self.name_attempts * (1 + self.postprocess_budget)
            + ladder * self.postprocess_budget
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_six_ladder_attempts() {
        let c = PipelineConfig::default();
        c.validate().unwrap();
        assert_eq!(c.strict_attempts + c.relaxed_attempts, 6);
        assert_eq!(c.completion_ceiling(), 3 + 6 + 3 * 3 + 6 * 2);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let mut c = PipelineConfig {
            codebleu_threshold: 1.5,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.codebleu_threshold = 0.5;
        c.name_attempts = 0;
        assert!(matches!(c.validate(), Err(PipelineError::Config(m)) if m.contains("name_attempts")));
        c.name_attempts = 1;
        c.verifier = VerifierCommand::external(" ");
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let c: PipelineConfig = serde_json::from_str(r#"{"codebleu_threshold": 0.7, "verifier": {"mode": "external", "command_template": "javac {file}"}}"#).unwrap();
        assert_eq!(c.codebleu_threshold, 0.7);
        assert_eq!(c.strict_attempts, 3);
        assert_eq!(c.verifier.mode, VerifierMode::External);
        assert_eq!(c.verifier.unstable_markers, vec!["Exception", "Error"]);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"threshold": 1}"#).is_err());
    }
}
