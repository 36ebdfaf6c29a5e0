use super::{non_empty, LlmBackend, LlmError, LlmRequest};
use serde::{Deserialize, Serialize};
use std::time::Duration;

#[derive(Serialize)]
struct GenerateOptions {
    temperature: f64,
    num_predict: u32,
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    stream: bool,
    options: GenerateOptions,
}

#[derive(Deserialize)]
struct GenerateResponse {
    response: String,
}

/// POSTs to `{endpoint}/api/generate` with the Ollama generate schema.
pub struct HttpBackend {
    endpoint: String,
    client: reqwest::blocking::Client,
    retries: usize,
}

impl HttpBackend {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

    pub fn new(endpoint: impl Into<String>) -> Result<Self, LlmError> {
        Self::with_timeout(endpoint, Self::DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(endpoint: impl Into<String>, timeout: Duration) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        Ok(HttpBackend {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            client,
            retries: 1,
        })
    }

    pub fn url(&self) -> String {
        format!("{}/api/generate", self.endpoint)
    }

    fn attempt(&self, request: &LlmRequest) -> Result<String, LlmError> {
        let body = GenerateRequest {
            model: &request.model,
            prompt: &request.prompt,
            stream: false,
            options: GenerateOptions {
                temperature: request.temperature,
                num_predict: request.max_tokens,
            },
        };
        let resp = self
            .client
            .post(self.url())
            .json(&body)
            .send()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(LlmError::Transport(format!("HTTP {status}")));
        }
        let parsed: GenerateResponse = resp
            .json()
            .map_err(|e| LlmError::Transport(format!("bad response body: {e}")))?;
        Ok(parsed.response)
    }
}

impl LlmBackend for HttpBackend {
    fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        request.validate()?;
        let mut last = None;
        for attempt in 0..=self.retries {
            match self.attempt(request) {
                Ok(text) => return non_empty(text),
                Err(e) => {
                    log::warn!("request to {} failed (attempt {}): {e}", self.url(), attempt + 1);
                    last = Some(e);
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }
}
