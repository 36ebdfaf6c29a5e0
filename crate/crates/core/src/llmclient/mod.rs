//! Completion backends behind one trait: a live Ollama-compatible HTTP
//! endpoint, a replay cassette keyed by request digest, and scripted
//! response sequences.

mod cassette;
mod http;
mod scripted;

pub use cassette::{Cassette, CassetteEntry, RecordingBackend, ReplayBackend, RequestSummary};
pub use http::HttpBackend;
pub use scripted::{FnBackend, ScriptedBackend};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_MODEL: &str = "codellama:7b-instruct";
pub const DEFAULT_ENDPOINT: &str = "http://localhost:11434";
pub const DEFAULT_TEMPERATURE: f64 = 0.2;
pub const DEFAULT_MAX_TOKENS: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub stage_tag: String,
}

impl LlmRequest {
    pub fn new(model: impl Into<String>, prompt: impl Into<String>, stage_tag: impl Into<String>) -> Self {
        LlmRequest {
            model: model.into(),
            prompt: prompt.into(),
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
            stage_tag: stage_tag.into(),
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.prompt.is_empty() {
            return Err(LlmError::InvalidRequest("prompt is empty".into()));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::InvalidRequest("max_tokens must be positive".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(LlmError::InvalidRequest(format!("temperature {} is invalid", self.temperature)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("backend returned an empty response")]
    EmptyResponse,
    #[error("no cassette entry for request digest {digest}")]
    CacheMiss { digest: String },
    #[error("scripted backend exhausted after {served} responses")]
    ScriptExhausted { served: usize },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("cassette: {0}")]
    Cassette(String),
}

pub trait LlmBackend: Send + Sync {
    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError>;
}

impl<B: LlmBackend + ?Sized> LlmBackend for std::sync::Arc<B> {
    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        (**self).complete(request)
    }
}

impl<B: LlmBackend + ?Sized> LlmBackend for Box<B> {
    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        (**self).complete(request)
    }
}

pub(crate) fn normalize_newlines(s: &str) -> String {
    s.replace("\r\n", "\n").replace('\r', "\n")
}

fn sha256_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

/// SHA-256 over `model + "\n" + prompt`, line endings normalized to `\n`.
pub fn digest(request: &LlmRequest) -> String {
    sha256_hex(&format!("{}\n{}", request.model, normalize_newlines(&request.prompt)))
}

pub(crate) fn prompt_hash(prompt: &str) -> String {
    sha256_hex(&normalize_newlines(prompt))
}

pub(crate) fn non_empty(text: String) -> Result<String, LlmError> {
    if text.trim().is_empty() {
        Err(LlmError::EmptyResponse)
    } else {
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_newline_agnostic() {
        let a = LlmRequest::new("m", "line one\nline two", "post_process");
        let b = LlmRequest::new("m", "line one\r\nline two", "name_suggestion");
        assert_eq!(digest(&a), digest(&a.clone()));
        assert_eq!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }

    #[test]
    fn one_character_changes_the_digest() {
        let a = LlmRequest::new("m", "prompt", "s");
        let b = LlmRequest::new("m", "prompT", "s");
        let c = LlmRequest::new("n", "prompt", "s");
        let expected_a = hex::encode(Sha256::digest(b"m\nprompt"));
        let expected_b = hex::encode(Sha256::digest(b"m\nprompT"));
        assert_eq!(digest(&a), expected_a);
        assert_eq!(digest(&b), expected_b);
        assert_ne!(digest(&a), digest(&b));
        assert_ne!(digest(&a), digest(&c));
    }

    #[test]
    fn request_validation() {
        assert!(LlmRequest::new("m", "", "s").validate().is_err());
        let mut r = LlmRequest::new("m", "p", "s");
        r.max_tokens = 0;
        assert!(r.validate().is_err());
        r.max_tokens = 1;
        r.temperature = -1.0;
        assert!(r.validate().is_err());
    }
}
