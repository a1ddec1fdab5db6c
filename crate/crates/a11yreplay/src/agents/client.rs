//! LLM client abstraction: a deterministic scripted backend for tests and
//! fixtures, and an HTTP backend speaking the OpenAI-compatible
//! chat-completions protocol.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable holding the HTTP backend's bearer token.
pub const API_KEY_ENV: &str = "A11YREPLAY_API_KEY";

/// Transport retries after the first attempt.
pub const MAX_RETRIES: u32 = 3;
/// Base backoff doubled per retry.
pub const RETRY_BACKOFF: Duration = Duration::from_millis(100);

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("transport error: {detail}")]
    Transport { detail: String, retryable: bool },
    #[error("http status {status}: {detail}")]
    Http {
        status: u16,
        detail: String,
        retryable: bool,
    },
    #[error("script exhausted")]
    ScriptExhausted,
    #[error("no scripted rule matches prompt (starts: {snippet:?})")]
    NoRuleMatch { snippet: String },
    #[error("scripted expectation failed at entry {index}: {detail}")]
    ExpectationFailed { index: usize, detail: String },
    #[error("empty completion")]
    EmptyResponse,
    #[error("bad script file: {0}")]
    BadScript(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl LlmError {
    pub fn retryable(&self) -> bool {
        match self {
            LlmError::Transport { retryable, .. } | LlmError::Http { retryable, .. } => *retryable,
            _ => false,
        }
    }
}

/// A completion backend. Implementations must be callable from concurrent
/// sessions.
pub trait LlmClient: Send + Sync {
    fn complete_raw(&self, prompt: &str) -> Result<String, LlmError>;

    fn name(&self) -> &str {
        "llm"
    }
}

/// Issues a completion with retry on transient transport failures
/// (exponential backoff, up to [`MAX_RETRIES`] retries).
pub fn llm_complete(client: &dyn LlmClient, prompt: &str) -> Result<String, LlmError> {
    let mut attempt = 0;
    loop {
        match client.complete_raw(prompt) {
            Ok(text) => return Ok(text),
            Err(e) if e.retryable() && attempt < MAX_RETRIES => {
                std::thread::sleep(RETRY_BACKOFF * 2u32.pow(attempt));
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// One FIFO script entry: an optional expectation about the prompt plus the
/// canned response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FifoEntry {
    /// The prompt must equal this exactly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_exact: Option<String>,
    /// The prompt must contain all of these substrings.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect_contains: Vec<String>,
    pub response: String,
}

/// One rule-table entry: all `contains` substrings must match and no
/// `lacks` substring may.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rule {
    #[serde(default)]
    pub contains: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lacks: Vec<String>,
    pub response: String,
}

/// On-disk script schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ScriptFile {
    /// Responses consumed in order; expectations asserted strictly.
    Fifo { entries: Vec<FifoEntry> },
    /// First matching rule wins; reusable across repeated prompts.
    Rules { rules: Vec<Rule> },
}

enum ScriptMode {
    Fifo {
        entries: VecDeque<FifoEntry>,
        consumed: usize,
    },
    Rules(Vec<Rule>),
}

/// Deterministic scripted backend.
pub struct ScriptedClient {
    mode: Mutex<ScriptMode>,
}

impl ScriptedClient {
    pub fn fifo(entries: Vec<FifoEntry>) -> Self {
        ScriptedClient {
            mode: Mutex::new(ScriptMode::Fifo {
                entries: entries.into(),
                consumed: 0,
            }),
        }
    }

    /// FIFO of bare responses with no prompt expectations.
    pub fn fifo_responses<S: Into<String>>(responses: Vec<S>) -> Self {
        ScriptedClient::fifo(
            responses
                .into_iter()
                .map(|r| FifoEntry {
                    expect_exact: None,
                    expect_contains: vec![],
                    response: r.into(),
                })
                .collect(),
        )
    }

    pub fn rules(rules: Vec<Rule>) -> Self {
        ScriptedClient {
            mode: Mutex::new(ScriptMode::Rules(rules)),
        }
    }

    pub fn from_script(script: ScriptFile) -> Self {
        match script {
            ScriptFile::Fifo { entries } => ScriptedClient::fifo(entries),
            ScriptFile::Rules { rules } => ScriptedClient::rules(rules),
        }
    }

    pub fn from_json_str(json: &str) -> Result<Self, LlmError> {
        let script: ScriptFile =
            serde_json::from_str(json).map_err(|e| LlmError::BadScript(e.to_string()))?;
        Ok(ScriptedClient::from_script(script))
    }

    pub fn from_path(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)?;
        ScriptedClient::from_json_str(&text)
    }

    /// Unconsumed FIFO entries (always 0 for rule tables).
    pub fn remaining(&self) -> usize {
        match &*self.mode.lock().expect("script lock") {
            ScriptMode::Fifo { entries, .. } => entries.len(),
            ScriptMode::Rules(_) => 0,
        }
    }
}

impl LlmClient for ScriptedClient {
    fn complete_raw(&self, prompt: &str) -> Result<String, LlmError> {
        let mut mode = self.mode.lock().expect("script lock");
        match &mut *mode {
            ScriptMode::Fifo { entries, consumed } => {
                let index = *consumed;
                let entry = entries.pop_front().ok_or(LlmError::ScriptExhausted)?;
                *consumed += 1;
                if let Some(exact) = &entry.expect_exact {
                    if prompt != exact {
                        return Err(LlmError::ExpectationFailed {
                            index,
                            detail: "prompt differs from expected text".to_owned(),
                        });
                    }
                }
                for needle in &entry.expect_contains {
                    if !prompt.contains(needle) {
                        return Err(LlmError::ExpectationFailed {
                            index,
                            detail: format!("prompt does not contain {needle:?}"),
                        });
                    }
                }
                Ok(entry.response)
            }
            ScriptMode::Rules(rules) => rules
                .iter()
                .find(|r| {
                    r.contains.iter().all(|n| prompt.contains(n.as_str()))
                        && !r.lacks.iter().any(|n| prompt.contains(n.as_str()))
                })
                .map(|r| r.response.clone())
                .ok_or_else(|| LlmError::NoRuleMatch {
                    snippet: prompt.chars().take(80).collect(),
                }),
        }
    }

    fn name(&self) -> &str {
        "scripted"
    }
}

/// HTTP backend configuration.
#[derive(Debug, Clone)]
pub struct HttpClientConfig {
    /// Base URL; `/v1/chat/completions` is appended.
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub timeout: Duration,
}

impl HttpClientConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        HttpClientConfig {
            base_url: base_url.into(),
            model: "gpt-4".to_owned(),
            temperature: 0.0,
            timeout: Duration::from_secs(120),
        }
    }
}

/// OpenAI-compatible chat-completions client. The bearer token is read
/// from [`API_KEY_ENV`]; requests default to temperature 0 for
/// reproducibility.
pub struct HttpLlmClient {
    config: HttpClientConfig,
    http: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: [ChatMessage<'a>; 1],
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: Option<String>,
}

impl HttpLlmClient {
    pub fn new(config: HttpClientConfig) -> Result<Self, LlmError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::Transport {
                detail: e.to_string(),
                retryable: false,
            })?;
        Ok(HttpLlmClient { config, http })
    }

    fn endpoint(&self) -> String {
        format!(
            "{}/v1/chat/completions",
            self.config.base_url.trim_end_matches('/')
        )
    }
}

impl LlmClient for HttpLlmClient {
    fn complete_raw(&self, prompt: &str) -> Result<String, LlmError> {
        let body = ChatRequest {
            model: &self.config.model,
            temperature: self.config.temperature,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
        };
        let mut req = self.http.post(self.endpoint()).json(&body);
        if let Ok(token) = std::env::var(API_KEY_ENV) {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| LlmError::Transport {
            detail: e.to_string(),
            retryable: true,
        })?;
        let status = resp.status();
        if !status.is_success() {
            let retryable = status.is_server_error() || status.as_u16() == 429;
            return Err(LlmError::Http {
                status: status.as_u16(),
                detail: resp.text().unwrap_or_default().chars().take(200).collect(),
                retryable,
            });
        }
        let parsed: ChatResponse = resp.json().map_err(|e| LlmError::Transport {
            detail: e.to_string(),
            retryable: false,
        })?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .filter(|c| !c.is_empty())
            .ok_or(LlmError::EmptyResponse)
    }

    fn name(&self) -> &str {
        "http"
    }
}
