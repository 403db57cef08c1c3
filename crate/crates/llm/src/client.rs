//! Chat-completions client with live, record and replay modes.

use crate::message::ChatMessage;
use crate::session::{SessionRecord, SessionStore, StoreError};
use crate::tools::ToolSpec;
use crate::transport::{HttpTransport, Transport, TransportError};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;
use thiserror::Error;

pub const DEFAULT_API_KEY_ENV: &str = "LDPD_LLM_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Live,
    Record,
    Replay,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "live" => Ok(Mode::Live),
            "record" => Ok(Mode::Record),
            "replay" => Ok(Mode::Replay),
            other => Err(format!("unknown llm mode {other:?}, expected live, record or replay")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Live => "live",
            Mode::Record => "record",
            Mode::Replay => "replay",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmConfig {
    /// Base URL or full chat-completions URL.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub api_key_env: String,
    pub timeout: Duration,
    pub max_retries: usize,
    /// First retry delay; doubles on every further retry.
    pub backoff: Duration,
    pub max_tool_calls: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://localhost:8000/v1".into(),
            model: "gpt-4o-mini".into(),
            temperature: 0.0,
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            timeout: Duration::from_secs(30),
            max_retries: 2,
            backoff: Duration::from_millis(500),
            max_tool_calls: 4,
        }
    }
}

impl LlmConfig {
    pub fn url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("endpoint answered HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("unreadable completion: {0}")]
    BadResponse(String),
    #[error("replay store has no response for key {0}")]
    ReplayMiss(String),
    #[error("replay mode needs a session store")]
    NoStore,
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("tool loop exceeded {0} tool calls")]
    DepthExceeded(usize),
}

impl LlmError {
    fn retryable(&self) -> bool {
        match self {
            LlmError::Transport(_) => true,
            LlmError::Http { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

/// Session key: SHA-256 over the model id and the serialized message list.
pub fn session_key(model: &str, messages: &[ChatMessage]) -> String {
    let mut h = Sha256::new();
    h.update(model.as_bytes());
    h.update([0u8]);
    h.update(serde_json::to_vec(messages).expect("messages serialize"));
    hex::encode(h.finalize())
}

/// Extracts the assistant message from a chat-completions response body.
pub fn parse_completion(raw: &str) -> Result<ChatMessage, LlmError> {
    let v: Value = serde_json::from_str(raw).map_err(|e| LlmError::BadResponse(e.to_string()))?;
    let msg = v
        .pointer("/choices/0/message")
        .ok_or_else(|| LlmError::BadResponse("missing choices[0].message".into()))?;
    let msg: ChatMessage = serde_json::from_value(msg.clone()).map_err(|e| LlmError::BadResponse(e.to_string()))?;
    if !msg.is_well_formed() {
        return Err(LlmError::BadResponse("empty assistant message".into()));
    }
    Ok(msg)
}

/// Cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct LlmClient {
    config: LlmConfig,
    mode: Mode,
    transport: Arc<dyn Transport>,
    store: Option<Arc<SessionStore>>,
}

impl fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmClient")
            .field("config", &self.config)
            .field("mode", &self.mode)
            .field("store", &self.store.as_ref().map(|s| s.path().to_path_buf()))
            .finish()
    }
}

impl LlmClient {
    pub fn new(config: LlmConfig, mode: Mode, transport: Arc<dyn Transport>, store: Option<Arc<SessionStore>>) -> Result<Self, LlmError> {
        if mode != Mode::Live && store.is_none() {
            return Err(LlmError::NoStore);
        }
        Ok(Self { config, mode, transport, store })
    }

    /// Client over real HTTP.
    pub fn http(config: LlmConfig, mode: Mode, store: Option<Arc<SessionStore>>) -> Result<Self, LlmError> {
        let transport = Arc::new(HttpTransport::new(config.timeout));
        Self::new(config, mode, transport, store)
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn request_body(&self, messages: &[ChatMessage], tools: &[ToolSpec]) -> Value {
        let mut body = json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
        });
        if !tools.is_empty() {
            body["tools"] = Value::Array(tools.iter().map(ToolSpec::to_wire).collect());
        }
        body
    }

    /// One completion, served from the store in replay mode.
    pub fn complete(&self, messages: &[ChatMessage], tools: &[ToolSpec]) -> Result<ChatMessage, LlmError> {
        let key = session_key(&self.config.model, messages);
        let raw = match self.mode {
            Mode::Replay => {
                let store = self.store.as_ref().ok_or(LlmError::NoStore)?;
                store.get(&key).ok_or(LlmError::ReplayMiss(key))?
            }
            Mode::Live => self.send(messages, tools)?,
            Mode::Record => {
                let raw = self.send(messages, tools)?;
                let store = self.store.as_ref().ok_or(LlmError::NoStore)?;
                store.append(&SessionRecord { key, response: raw.clone() })?;
                raw
            }
        };
        parse_completion(&raw)
    }

    fn send(&self, messages: &[ChatMessage], tools: &[ToolSpec]) -> Result<String, LlmError> {
        let body = self.request_body(messages, tools);
        let url = self.config.url();
        let mut headers = vec![("Content-Type".to_string(), "application/json".to_string())];
        if let Ok(key) = std::env::var(&self.config.api_key_env) {
            headers.push(("Authorization".to_string(), format!("Bearer {key}")));
        }
        let mut attempt = 0;
        loop {
            let err = match self.transport.post_json(&url, &headers, &body) {
                Ok(r) if (200..300).contains(&r.status) => return Ok(r.body),
                Ok(r) => LlmError::Http { status: r.status, body: r.body },
                Err(e) => LlmError::Transport(e),
            };
            if attempt >= self.config.max_retries || !err.retryable() {
                return Err(err);
            }
            std::thread::sleep(self.config.backoff * 2u32.pow(attempt as u32));
            attempt += 1;
        }
    }
}
