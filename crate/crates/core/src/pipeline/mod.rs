//! The four-stage orchestrator: data refinement, the guarded
//! post-processing ladder, unique naming, and compile/verify with reversion
//! to the baseline test.

mod config;
mod report;
mod stages;
mod suite;
mod verify;

pub use config::{LlmSettings, PipelineConfig, VerifierCommand, VerifierMode};
pub use report::{
    CompletionCounts, EnhancementOutcome, OutcomeKind, Percentages, SkippedInput, SuiteReport, SuiteShape, Totals,
    VerifyTotals, SCHEMA_VERSION,
};
pub use stages::{merge_and_dedup, NameResult, Pipeline, PostProcessResult, RefineResult};
pub use suite::{EnhancedTest, SuiteInput, SuiteRun};
pub use verify::{compile_and_verify, Verdict};

use crate::llmclient::LlmError;
use crate::prompts::PromptError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("backend failure: {0}")]
    Backend(#[from] LlmError),
    #[error("prompt: {0}")]
    Prompt(#[from] PromptError),
    #[error("verifier could not be run: {0}")]
    VerifierSpawn(String),
}
